"""System Architectural Model: component tree, links, registrations, splits.

All values here are immutable once built.  Structural checks live in
:func:`validate_spec`; nothing in this module parses text or evaluates
conditions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .conditions import SORTS, CondExpr, free_vars
from .errors import UnknownComponent

ROLES = ("entry", "exit", "allowable")


@dataclass(frozen=True)
class Port:
    name: str
    direction: str  # "input" | "output"
    value_sort: str


@dataclass(frozen=True)
class DataLink:
    source: tuple  # (component, port)
    target: tuple

    def __str__(self):
        return f"{self.source[0]}.{self.source[1]} -> {self.target[0]}.{self.target[1]}"


@dataclass(frozen=True)
class ControlLink:
    source: str
    target: str
    guard: Optional[CondExpr] = None

    @property
    def ident(self) -> tuple:
        return (self.source, self.target)


@dataclass(frozen=True)
class SplitBranch:
    guard: CondExpr
    links: tuple  # of (source, target) control-link identities


@dataclass(frozen=True)
class SplitClause:
    owner: str
    branches: tuple


@dataclass(frozen=True)
class EventRegistration:
    method: str
    component: str
    role: str
    binding: tuple = ()  # ((payload_key, (component, port)), ...)

    def binding_map(self) -> dict:
        return dict(self.binding)


@dataclass(frozen=True)
class ComponentDef:
    name: str
    inputs: tuple = ()
    outputs: tuple = ()
    children: tuple = ()
    data_links: tuple = ()
    control_links: tuple = ()
    entry_events: frozenset = frozenset()
    exit_events: frozenset = frozenset()
    allowable_events: frozenset = frozenset()
    preconditions: tuple = ()
    postconditions: tuple = ()
    invariants: tuple = ()

    def port(self, name: str) -> Optional[Port]:
        for p in self.inputs + self.outputs:
            if p.name == name:
                return p
        return None

    def events(self, role: str) -> frozenset:
        return {"entry": self.entry_events, "exit": self.exit_events,
                "allowable": self.allowable_events}[role]


@dataclass(frozen=True)
class SamSpec:
    top: str
    components: dict = field(default_factory=dict)
    registrations: tuple = ()
    splits: tuple = ()
    _derived: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def component(self, name: str) -> ComponentDef:
        try:
            return self.components[name]
        except KeyError:
            raise UnknownComponent(f"unknown component {name!r}") from None

    def parent_of(self, name: str) -> Optional[str]:
        """Parent in the containment tree (cached; assumes a validated spec)."""
        parents = self._derived.get("parents")
        if parents is None:
            parents = {}
            for c in self.components.values():
                for ch in c.children:
                    parents.setdefault(ch, c.name)
            self._derived["parents"] = parents
        return parents.get(name)

    def preorder(self) -> list:
        order = self._derived.get("preorder")
        if order is None:
            order = subtree(self, self.top)
            self._derived["preorder"] = order
        return order


@dataclass(frozen=True, order=True)
class Diagnostic:
    path: str
    kind: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.kind}: {self.message}"


def pattern_matches(pattern: str, method: str) -> bool:
    """Exact name, or a prefix when the pattern ends in a single ``*``."""
    if pattern.endswith("*"):
        return method.startswith(pattern[:-1])
    return pattern == method


def patterns_overlap(a: str, b: str) -> bool:
    if a.endswith("*") and b.endswith("*"):
        pa, pb = a[:-1], b[:-1]
        return pa.startswith(pb) or pb.startswith(pa)
    if a.endswith("*"):
        return pattern_matches(a, b)
    if b.endswith("*"):
        return pattern_matches(b, a)
    return a == b


def is_top(spec: SamSpec, name: str) -> bool:
    spec.component(name)
    return name == spec.top


def subtree(spec: SamSpec, name: str) -> list:
    """Preorder walk of the containment tree below ``name`` (inclusive).

    Components already visited are skipped, so the walk terminates on
    malformed specs with shared children or cycles.
    """
    spec.component(name)
    out, seen = [], set()
    stack = [name]
    while stack:
        n = stack.pop()
        if n in seen or n not in spec.components:
            continue
        seen.add(n)
        out.append(n)
        stack.extend(reversed(spec.components[n].children))
    return out


# ---------------------------------------------------------------- validation

def validate_spec(spec: SamSpec) -> list:
    """Return every invariant violation, sorted by (path, kind, message)."""
    diags: list = []

    def add(path, kind, message):
        diags.append(Diagnostic(path, kind, message))

    comps = spec.components
    for key, c in comps.items():
        if key != c.name:
            add(key, "name-mismatch", f"component stored under {key!r} is named {c.name!r}")

    if spec.top not in comps:
        add("<top>", "unknown-component", f"top component {spec.top!r} is not defined")

    parents: dict = {}
    for c in comps.values():
        for ch in c.children:
            if ch not in comps:
                add(c.name, "unknown-component", f"child {ch!r} is not defined")
                continue
            if ch == c.name:
                add(c.name, "not-a-tree", "component contains itself")
            elif ch in parents:
                add(ch, "not-a-tree",
                    f"listed as child of both {parents[ch]!r} and {c.name!r}")
            else:
                parents[ch] = c.name
    if spec.top in comps:
        if spec.top in parents:
            add(spec.top, "not-a-tree", f"top component is a child of {parents[spec.top]!r}")
        reach = set(subtree(spec, spec.top))
        for name in comps:
            if name not in reach and name not in parents:
                add(name, "not-a-tree", "component is unreachable from top")
            elif name not in reach:
                add(name, "not-a-tree", "component sits on a containment cycle")

    for c in comps.values():
        _validate_component(spec, c, add)

    for i, reg in enumerate(spec.registrations):
        _validate_registration(spec, i, reg, add)

    by_role: dict = {r: [] for r in ROLES}
    for reg in spec.registrations:
        if reg.role in by_role:
            by_role[reg.role].append(reg)
    for role, regs in by_role.items():
        for i, a in enumerate(regs):
            for b in regs[i + 1:]:
                if patterns_overlap(a.method, b.method):
                    add(f"register:{b.method}", "duplicate-registration",
                        f"{role} pattern overlaps {a.method!r} ({a.component})")

    for i, sp in enumerate(spec.splits):
        _validate_split(spec, i, sp, add)

    return sorted(set(diags))


def _validate_component(spec, c, add):
    seen = set()
    for p in c.inputs + c.outputs:
        if not p.name:
            add(c.name, "bad-port", "empty port name")
        if p.name in seen:
            add(f"{c.name}.{p.name}", "duplicate-port", "port name declared twice")
        seen.add(p.name)
        if p.value_sort not in SORTS:
            add(f"{c.name}.{p.name}", "bad-sort", f"unknown sort {p.value_sort!r}")
    for p in c.inputs:
        if p.direction != "input":
            add(f"{c.name}.{p.name}", "bad-port", "input port with output direction")
    for p in c.outputs:
        if p.direction != "output":
            add(f"{c.name}.{p.name}", "bad-port", "output port with input direction")

    for a, b in (("entry", "exit"), ("entry", "allowable"), ("exit", "allowable")):
        for pa in sorted(c.events(a)):
            for pb in sorted(c.events(b)):
                if patterns_overlap(pa, pb):
                    add(c.name, "role-overlap", f"{pa!r} ({a}) overlaps {pb!r} ({b})")

    scope = {c.name} | {ch for ch in c.children if ch in spec.components}

    def endpoint(comp, port, want_dirs, where):
        path = f"{c.name}/dataflow/{where}"
        if comp not in scope:
            add(path, "unknown-component",
                f"{comp!r} is neither {c.name!r} nor one of its children")
            return
        p = spec.components[comp].port(port)
        if p is None:
            add(path, "unknown-port", f"{comp}.{port} is not declared")
            return
        role = "own" if comp == c.name else "child"
        if (role, p.direction) not in want_dirs:
            add(path, "bad-link", f"{comp}.{port} cannot be a link {where}")

    for i, link in enumerate(c.data_links):
        endpoint(*link.source, {("child", "output"), ("own", "input")}, "source")
        endpoint(*link.target, {("child", "input"), ("own", "output")}, "target")
        if link.source == link.target:
            add(f"{c.name}/dataflow", "bad-link", f"self-loop on {link}")

    idents = set()
    for cl in c.control_links:
        for end in (cl.source, cl.target):
            if end not in scope:
                add(f"{c.name}/controlflow", "unknown-component",
                    f"{end!r} is neither {c.name!r} nor one of its children")
        if cl.ident in idents:
            add(f"{c.name}/controlflow", "duplicate-control-link",
                f"{cl.source} -> {cl.target} declared twice")
        idents.add(cl.ident)
        if cl.guard is not None:
            _check_vars(spec, c.name, cl.guard, f"{c.name}/controlflow", add)

    for kind, conds in (("pre", c.preconditions), ("post", c.postconditions),
                        ("invariant", c.invariants)):
        for i, cond in enumerate(conds):
            _check_vars(spec, c.name, cond, f"{c.name}/{kind}[{i}]", add)


def _check_vars(spec, scope, expr, path, add):
    for name in free_vars(expr, scope):
        comp, _, port = name.partition(".")
        if comp not in spec.components or spec.components[comp].port(port) is None:
            add(path, "unknown-port", f"condition references undeclared port {name}")


def _validate_registration(spec, i, reg, add):
    path = f"register:{reg.method}"
    if reg.role not in ROLES:
        add(path, "bad-role", f"unknown role {reg.role!r}")
    if reg.component not in spec.components:
        add(path, "unknown-component", f"component {reg.component!r} is not defined")
        return
    c = spec.components[reg.component]
    if not reg.method:
        add(path, "bad-registration", "empty method pattern")
    if reg.method.count("*") > 1 or ("*" in reg.method and not reg.method.endswith("*")):
        add(path, "bad-registration", "only a single trailing '*' wildcard is allowed")
    want = {"entry": "input", "exit": "output"}.get(reg.role)
    keys = set()
    for key, (comp, port) in reg.binding:
        if key in keys:
            add(path, "bad-binding", f"payload key {key!r} bound twice")
        keys.add(key)
        if reg.role == "allowable":
            add(path, "bad-binding", "allowable registrations bind no ports")
            continue
        if comp not in spec.components or spec.components[comp].port(port) is None:
            add(path, "unknown-port", f"{comp}.{port} is not declared")
            continue
        p = spec.components[comp].port(port)
        if comp != reg.component or p.direction != want:
            add(path, "bad-binding",
                f"{reg.role} registration must bind {want} ports of {reg.component}")
    if reg.role in ROLES and reg.method not in c.events(reg.role):
        add(path, "role-mismatch",
            f"{reg.method!r} is not among {reg.component}'s {reg.role} events")


def _validate_split(spec, i, sp, add):
    path = f"split:{sp.owner}"
    if sp.owner not in spec.components:
        add(path, "unknown-component", f"split owner {sp.owner!r} is not defined")
        return
    owner = spec.components[sp.owner]
    idents = {cl.ident for cl in owner.control_links}
    for j, br in enumerate(sp.branches):
        _check_vars(spec, sp.owner, br.guard, f"{path}[{j}]", add)
        for ident in br.links:
            if tuple(ident) not in idents:
                add(f"{path}[{j}]", "unknown-control-link",
                    f"{ident[0]} -> {ident[1]} is not a control link of {sp.owner}")
