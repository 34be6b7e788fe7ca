"""Concrete syntax for SAM specs: a parenthesised prefix notation.

Parsing runs in two phases.  The reader turns text into a tree of atoms and
lists (reporting delimiter and literal errors), then the builder walks that
tree into model objects.  The first error stops everything.  See
``docs/sam-grammar.md`` for the grammar.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .conditions import (ARITH_OPS, BOOL_OPS, CMP_OPS, INT_MAX, INT_MIN, SORTS,
                         Arith, BoolOp, Cmp, Len, Lit, Var, render_expr,
                         render_value, sort_of)
from .errors import SamError
from .model import (ROLES, ComponentDef, ControlLink, DataLink,
                    EventRegistration, Port, SamSpec, SplitBranch, SplitClause)

COMPONENT_CLAUSES = ("inputs", "outputs", "children", "dataflow", "controlflow",
                     "entry", "exit", "allowable", "pre", "post", "invariant")
TOP_CLAUSES = ("top", "component", "register", "split")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1


class ParseError(SamError):
    def __init__(self, span: SourceSpan, kind: str, message: str):
        super().__init__(f"{span.line}:{span.column}: {kind}: {message}", kind)
        self.span = span
        self.message = message


# ---------------------------------------------------------------- reader

@dataclass(frozen=True)
class Atom:
    text: str
    span: SourceSpan
    quoted: bool = False   # string literal (text holds the decoded value)


@dataclass(frozen=True)
class SList:
    items: tuple
    span: SourceSpan       # the opening parenthesis


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n\f\v]+)
  | (?P<comment>;[^\n]*)
  | (?P<open>\()
  | (?P<close>\))
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<badstring>"[^\n]*)
  | (?P<atom>[^\s()";]+)
""", re.VERBOSE)


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def span(self, pos: int, length: int = 1) -> SourceSpan:
        lo, hi = 0, len(self.line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.line_starts[mid] <= pos:
                lo = mid
            else:
                hi = mid - 1
        return SourceSpan(lo + 1, pos - self.line_starts[lo] + 1, max(1, length))

    def eof_span(self) -> SourceSpan:
        return self.span(max(0, len(self.text) - 1))

    def read_all(self) -> list:
        stack: list = [[]]
        opens: list = []
        pos, n = 0, len(self.text)
        while pos < n:
            m = _TOKEN.match(self.text, pos)
            if m is None:  # unreachable: the atom class is a catch-all
                raise ParseError(self.span(pos), "bad-literal", "unreadable input")
            kind = m.lastgroup
            start, pos = m.start(), m.end()
            if kind in ("ws", "comment"):
                continue
            if kind == "open":
                stack.append([])
                opens.append(start)
            elif kind == "close":
                if not opens:
                    raise ParseError(self.span(start), "unbalanced-delimiter",
                                     "unmatched ')'")
                items = stack.pop()
                stack[-1].append(SList(tuple(items), self.span(opens.pop())))
            elif kind == "string":
                try:
                    value = json.loads(m.group())
                except ValueError:
                    raise ParseError(self.span(start, pos - start), "bad-literal",
                                     "malformed string escape") from None
                stack[-1].append(Atom(value, self.span(start, pos - start), True))
            elif kind == "badstring":
                raise ParseError(self.span(start, pos - start), "bad-literal",
                                 "unterminated string literal")
            else:
                stack[-1].append(Atom(m.group(), self.span(start, pos - start)))
        if opens:
            raise ParseError(self.eof_span(), "unbalanced-delimiter",
                             "unexpected end of input: missing ')'")
        return stack[0]


def _read_one(text: str, what: str) -> tuple:
    reader = _Reader(text)
    forms = reader.read_all()
    if not forms:
        raise ParseError(reader.eof_span(), "bad-literal", f"empty input: expected {what}")
    if len(forms) > 1:
        extra = forms[1]
        raise ParseError(extra.span, "bad-literal", f"unexpected content after {what}")
    return forms[0], reader


# ---------------------------------------------------------------- helpers

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_QNAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)?\Z")
_INT = re.compile(r"-?[0-9]+\Z")
_FLOAT = re.compile(r"-?[0-9]+(\.[0-9]*([eE][+-]?[0-9]+)?|[eE][+-]?[0-9]+)\Z")
_RESERVED = {"true", "false", "list", "len", "->"} | set(CMP_OPS) | set(ARITH_OPS) | set(BOOL_OPS)


def _err(node, kind, message):
    return ParseError(node.span, kind, message)


def _ident(node, what: str) -> str:
    if not isinstance(node, Atom) or node.quoted or not _IDENT.match(node.text) \
            or node.text in _RESERVED:
        raise _err(node, "bad-literal", f"expected {what} identifier")
    return node.text


def _qualified(node, what: str) -> tuple:
    if not isinstance(node, Atom) or node.quoted or node.text.count(".") != 1 \
            or not _QNAME.match(node.text):
        raise _err(node, "bad-literal", f"expected {what} as Component.port")
    comp, port = node.text.split(".")
    return comp, port


def _string(node, what: str) -> str:
    if not isinstance(node, Atom) or not node.quoted:
        raise _err(node, "bad-literal", f"expected quoted {what}")
    return node.text


def _list(node, what: str) -> tuple:
    if not isinstance(node, SList):
        raise _err(node, "bad-literal", f"expected parenthesised {what}")
    return node.items


def _arrow(node, what: str) -> tuple:
    items = _list(node, what)
    if len(items) < 3 or not isinstance(items[1], Atom) or items[1].quoted \
            or items[1].text != "->":
        raise _err(node, "bad-literal", f"expected ({what} source -> target)")
    return items


def _head(node) -> str | None:
    if isinstance(node, SList) and node.items and isinstance(node.items[0], Atom) \
            and not node.items[0].quoted:
        return node.items[0].text
    return None


# ---------------------------------------------------------------- conditions

def _literal(node: Atom):
    text = node.text
    if node.quoted:
        return text
    if text == "true":
        return True
    if text == "false":
        return False
    if _INT.match(text):
        v = int(text)
        if not INT_MIN <= v <= INT_MAX:
            raise _err(node, "bad-literal", f"integer {text} exceeds 64-bit range")
        return v
    if _FLOAT.match(text):
        v = float(text)
        if v != v or v in (float("inf"), float("-inf")):
            raise _err(node, "bad-literal", f"float {text} is not finite")
        return v
    return None


def _build_expr(node):
    if isinstance(node, Atom):
        v = _literal(node)
        if v is not None:
            return Lit(v)
        if node.text in _RESERVED or not _QNAME.match(node.text):
            raise _err(node, "bad-literal", f"bad atom {node.text!r} in condition")
        return Var(node.text)
    items = node.items
    if not items:
        raise _err(node, "bad-literal", "empty expression ()")
    op_node = items[0]
    if not isinstance(op_node, Atom) or op_node.quoted:
        raise _err(op_node, "unknown-keyword", "expression must start with an operator")
    op, args = op_node.text, items[1:]

    def arity(lo, hi=None):
        if len(args) < lo or (hi is not None and len(args) > hi):
            want = str(lo) if hi == lo else f"{lo}..{'' if hi is None else hi}"
            raise _err(node, "bad-literal",
                       f"operator {op!r} takes {want} arguments, got {len(args)}")

    if op in CMP_OPS:
        arity(2, 2)
        return Cmp(op, _build_expr(args[0]), _build_expr(args[1]))
    if op in ARITH_OPS:
        arity(2, 2)
        return Arith(op, _build_expr(args[0]), _build_expr(args[1]))
    if op == "not":
        arity(1, 1)
        return BoolOp(op, (_build_expr(args[0]),))
    if op in ("and", "or"):
        arity(1)
        return BoolOp(op, tuple(_build_expr(a) for a in args))
    if op == "len":
        arity(1, 1)
        return Len(_build_expr(args[0]))
    if op == "list":
        values = []
        for a in args:
            if not isinstance(a, Atom) or _literal(a) is None:
                raise _err(a, "bad-literal", "list literal elements must be literals")
            values.append(_literal(a))
        if len({sort_of(v) for v in values}) > 1:
            raise _err(node, "bad-literal", "list literal mixes sorts")
        return Lit(tuple(values))
    raise _err(op_node, "unknown-keyword", f"unknown operator {op!r}")


def parse_condition(text: str):
    """Parse one parenthesised condition expression."""
    form, _ = _read_one(text, "a condition")
    if not isinstance(form, SList):
        raise _err(form, "bad-literal", "a condition must be parenthesised")
    return _build_expr(form)


# ---------------------------------------------------------------- spec builder

def _ports(node, direction):
    out = []
    for item in node.items[1:]:
        pair = _list(item, "port")
        if len(pair) != 2:
            raise _err(item, "bad-literal", "port must be (name sort)")
        name = _ident(pair[0], "port")
        sort = pair[1].text if isinstance(pair[1], Atom) and not pair[1].quoted else None
        if sort not in SORTS:
            raise _err(pair[1], "bad-literal", f"unknown sort; expected one of {', '.join(SORTS)}")
        out.append(Port(name, direction, sort))
    return tuple(out)


def _events(node):
    if len(node.items) != 2:
        raise _err(node, "bad-literal", "event clause takes one list of method strings")
    return frozenset(_string(s, "method name") for s in _list(node.items[1], "method list"))


def _control_link(node):
    items = _arrow(node, "control link")
    if len(items) > 4:
        raise _err(node, "bad-literal", "control link is (source -> target [guard])")
    guard = _build_expr(items[3]) if len(items) == 4 else None
    return ControlLink(_ident(items[0], "component"), _ident(items[2], "component"), guard)


def _component(node):
    items = node.items
    if len(items) < 2:
        raise _err(node, "bad-literal", "component needs a name")
    name = _ident(items[1], "component")
    fields: dict = {}
    for clause in items[2:]:
        key = _head(clause)
        if key is None:
            raise _err(clause, "bad-literal", "expected a component clause")
        if key not in COMPONENT_CLAUSES:
            raise _err(clause.items[0], "unknown-keyword", f"unknown component clause {key!r}")
        if key in fields:
            raise _err(clause, "duplicate-clause", f"{name} has more than one ({key} ...)")
        args = clause.items[1:]
        if key == "inputs":
            fields[key] = _ports(clause, "input")
        elif key == "outputs":
            fields[key] = _ports(clause, "output")
        elif key == "children":
            fields[key] = tuple(_ident(a, "component") for a in args)
        elif key == "dataflow":
            links = []
            for a in args:
                it = _arrow(a, "data link")
                if len(it) != 3:
                    raise _err(a, "bad-literal", "data link is (Comp.port -> Comp.port)")
                links.append(DataLink(_qualified(it[0], "link source"),
                                      _qualified(it[2], "link target")))
            fields[key] = tuple(links)
        elif key == "controlflow":
            fields[key] = tuple(_control_link(a) for a in args)
        elif key in ("entry", "exit", "allowable"):
            fields[key] = _events(clause)
        else:
            for a in args:
                if not isinstance(a, SList):
                    raise _err(a, "bad-literal", "conditions must be parenthesised")
            fields[key] = tuple(_build_expr(a) for a in args)
    return ComponentDef(
        name=name,
        inputs=fields.get("inputs", ()),
        outputs=fields.get("outputs", ()),
        children=fields.get("children", ()),
        data_links=fields.get("dataflow", ()),
        control_links=fields.get("controlflow", ()),
        entry_events=fields.get("entry", frozenset()),
        exit_events=fields.get("exit", frozenset()),
        allowable_events=fields.get("allowable", frozenset()),
        preconditions=fields.get("pre", ()),
        postconditions=fields.get("post", ()),
        invariants=fields.get("invariant", ()),
    )


def _registration(node):
    items = node.items
    if len(items) not in (4, 5):
        raise _err(node, "bad-literal",
                   'register is (register "method" Component role [((key -> C.port) ...)])')
    method = _string(items[1], "method name")
    comp = _ident(items[2], "component")
    role = items[3].text if isinstance(items[3], Atom) and not items[3].quoted else None
    if role not in ROLES:
        raise _err(items[3], "unknown-keyword", f"unknown role; expected one of {', '.join(ROLES)}")
    binding = []
    if len(items) == 5:
        for b in _list(items[4], "binding list"):
            it = _arrow(b, "binding")
            if len(it) != 3:
                raise _err(b, "bad-literal", "binding is (key -> Comp.port)")
            binding.append((_ident(it[0], "payload key"), _qualified(it[2], "bound port")))
    return EventRegistration(method, comp, role, tuple(binding))


def _split(node):
    items = node.items
    if len(items) < 2:
        raise _err(node, "bad-literal", "split needs an owner component")
    owner = _ident(items[1], "component")
    branches = []
    for br in items[2:]:
        parts = _list(br, "split branch")
        if not parts:
            raise _err(br, "bad-literal", "split branch is (guard (A -> B) ...)")
        guard = _build_expr(parts[0])
        links = []
        for ln in parts[1:]:
            it = _arrow(ln, "split link")
            if len(it) != 3:
                raise _err(ln, "bad-literal", "split link is (A -> B)")
            links.append((_ident(it[0], "component"), _ident(it[2], "component")))
        branches.append(SplitBranch(guard, tuple(links)))
    return SplitClause(owner, tuple(branches))


def parse_spec(text: str) -> SamSpec:
    """Parse SAM source text.  Raises :class:`ParseError` on the first problem."""
    form, _ = _read_one(text, "a (sam ...) form")
    if _head(form) != "sam":
        node = form.items[0] if isinstance(form, SList) and form.items else form
        raise _err(node, "unknown-keyword", "a spec must be a (sam ...) form")
    top = None
    components: dict = {}
    registrations, splits = [], []
    for clause in form.items[1:]:
        key = _head(clause)
        if key is None:
            raise _err(clause, "bad-literal", "expected a (keyword ...) clause")
        if key not in TOP_CLAUSES:
            raise _err(clause.items[0], "unknown-keyword", f"unknown clause {key!r}")
        if key == "top":
            if top is not None:
                raise _err(clause, "duplicate-clause", "more than one (top ...) clause")
            if len(clause.items) != 2:
                raise _err(clause, "bad-literal", "top is (top Component)")
            top = _ident(clause.items[1], "component")
        elif key == "component":
            comp = _component(clause)
            if comp.name in components:
                raise _err(clause, "duplicate-clause", f"component {comp.name!r} defined twice")
            components[comp.name] = comp
        elif key == "register":
            registrations.append(_registration(clause))
        else:
            splits.append(_split(clause))
    if top is None:
        raise _err(form, "bad-literal", "missing (top ...) clause")
    return SamSpec(top, components, tuple(registrations), tuple(splits))


# ---------------------------------------------------------------- renderer

def _render_component(c: ComponentDef) -> list:
    lines = [f"  (component {c.name}"]

    def ports(ps):
        return " ".join(f"({p.name} {p.value_sort})" for p in ps)

    if c.inputs:
        lines.append(f"    (inputs {ports(c.inputs)})")
    if c.outputs:
        lines.append(f"    (outputs {ports(c.outputs)})")
    if c.children:
        lines.append(f"    (children {' '.join(c.children)})")
    if c.data_links:
        body = " ".join(
            f"({dl.source[0]}.{dl.source[1]} -> {dl.target[0]}.{dl.target[1]})"
            for dl in c.data_links)
        lines.append(f"    (dataflow {body})")
    if c.control_links:
        parts = []
        for cl in c.control_links:
            guard = f" {render_expr(cl.guard)}" if cl.guard is not None else ""
            parts.append(f"({cl.source} -> {cl.target}{guard})")
        lines.append(f"    (controlflow {' '.join(parts)})")
    for role in ("entry", "exit", "allowable"):
        events = c.events(role)
        if events:
            body = " ".join(render_value(m) for m in sorted(events))
            lines.append(f"    ({role} ({body}))")
    for key, conds in (("pre", c.preconditions), ("post", c.postconditions),
                       ("invariant", c.invariants)):
        if conds:
            lines.append(f"    ({key} {' '.join(render_expr(x) for x in conds)})")
    lines[-1] += ")"
    return lines


def render_spec(spec: SamSpec) -> str:
    """Canonical text: 2-space indent, top, components in preorder, registers, splits."""
    lines = ["(sam", f"  (top {spec.top})"]
    order = [n for n in spec.preorder()] if spec.top in spec.components else []
    order += sorted(n for n in spec.components if n not in set(order))
    for name in order:
        lines.extend(_render_component(spec.components[name]))
    for reg in spec.registrations:
        text = f"  (register {render_value(reg.method)} {reg.component} {reg.role}"
        if reg.binding:
            text += " (" + " ".join(f"({k} -> {c}.{p})" for k, (c, p) in reg.binding) + ")"
        lines.append(text + ")")
    for sp in spec.splits:
        parts = []
        for br in sp.branches:
            links = "".join(f" ({a} -> {b})" for a, b in br.links)
            parts.append(f"({render_expr(br.guard)}{links})")
        lines.append(f"  (split {sp.owner}" + "".join(" " + p for p in parts) + ")")
    lines[-1] += ")"
    return "\n".join(lines) + "\n"
