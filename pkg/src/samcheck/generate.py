"""Seeded random specs whose predictions always exist.

Every generated component has one or two int inputs and outputs.  Leaf
postconditions pin each output to an affine function of all inputs with
non-zero coefficients; a parent's postconditions are the composition of its
children's functions along the generated data links.  So any change to an
observed input or output of any component breaks at least one postcondition.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .conditions import Arith, BoolOp, Cmp, Environment, Lit, Var
from .errors import SamError
from .model import (ComponentDef, ControlLink, DataLink, EventRegistration, Port,
                    SamSpec)

COEFFS = (-2, -1, 1, 2, 3)


@dataclass
class _Node:
    name: str
    inputs: list
    outputs: list
    children: list = field(default_factory=list)
    links: list = field(default_factory=list)        # ((comp, port), (comp, port))
    control: list = field(default_factory=list)      # (source, target)
    forms: dict = field(default_factory=dict)        # output -> (coeffs over inputs, const)
    child_inputs: dict = field(default_factory=dict)  # (child, port) -> form over own inputs
    allowable: bool = False
    pres: list = field(default_factory=list)


def _compose(form, arg_forms):
    """Substitute affine forms for the variables of ``form``."""
    coeffs, const = form
    out: dict = {}
    total = const
    for var, a in coeffs.items():
        sub_coeffs, sub_const = arg_forms[var]
        total += a * sub_const
        for v, b in sub_coeffs.items():
            out[v] = out.get(v, 0) + a * b
    return {v: c for v, c in out.items() if c}, total


def _affine_expr(coeffs, const, order):
    terms = []
    for var in order:
        a = coeffs.get(var, 0)
        if a == 1:
            terms.append(Var(var))
        elif a:
            terms.append(Arith("*", Lit(a), Var(var)))
    if const or not terms:
        terms.append(Lit(const))
    expr = terms[0]
    for t in terms[1:]:
        expr = Arith("+", expr, t)
    return expr


class _Builder:
    def __init__(self, rng, max_children):
        self.rng = rng
        self.max_children = max_children
        self.count = 0

    def name(self):
        self.count += 1
        return "Top" if self.count == 1 else f"C{self.count - 1}"

    def build(self, depth_left):
        rng = self.rng
        node = _Node(self.name(),
                     [f"i{k}" for k in range(rng.randint(1, 2))],
                     [f"o{k}" for k in range(rng.randint(1, 2))])
        node.allowable = rng.random() < 0.4
        if depth_left > 1 and rng.random() < 0.7:
            kids = [self.build(depth_left - 1) for _ in range(rng.randint(1, self.max_children))]
            if self._wire(node, kids):
                return node
            node.children, node.links, node.control = [], [], []
        for o in node.outputs:
            node.forms[o] = ({i: rng.choice(COEFFS) for i in node.inputs}, rng.randint(-3, 3))
        return node

    def _wire(self, node, kids):
        rng = self.rng
        identity = {i: ({i: 1}, 0) for i in node.inputs}
        for _ in range(50):
            links, control, child_inputs = [], set(), {}
            available = [((node.name, i), identity[i]) for i in node.inputs]
            produced = []
            for kid in kids:
                arg_forms = {}
                for port in kid.inputs:
                    (src, form) = rng.choice(available)
                    links.append((src, (kid.name, port)))
                    arg_forms[port] = form
                    child_inputs[(kid.name, port)] = form
                    if src[0] != node.name:
                        control.add((src[0], kid.name))
                outs = []
                for o in kid.outputs:
                    outs.append(((kid.name, o), _compose(kid.forms[o], arg_forms)))
                available = available + outs
                produced.extend(outs)
            forms = {}
            for o in node.outputs:
                src, form = rng.choice(produced)
                links.append((src, (node.name, o)))
                forms[o] = form
            if all(any(forms[o][0].get(i) for o in node.outputs) for i in node.inputs):
                node.children, node.links, node.forms = kids, links, forms
                node.child_inputs = child_inputs
                node.control = sorted(control) + [
                    (node.name, k.name) for k in kids
                    if not any(t == k.name for _, t in control) and rng.random() < 0.3]
                return True
        return False


def _walk(node):
    yield node
    for k in node.children:
        yield from _walk(k)


def _zero_values(node, values, out):
    """Record each component's input values when the top inputs are all zero."""
    out[node.name] = dict(values)
    for kid in node.children:
        kid_vals = {}
        for port in kid.inputs:
            coeffs, const = node.child_inputs[(kid.name, port)]
            kid_vals[port] = const + sum(a * values[v] for v, a in coeffs.items())
        _zero_values(kid, kid_vals, out)


def _pre(rng, port, v0):
    d = rng.randint(6, 40)
    shape = rng.randrange(3)
    if shape == 0:
        return Cmp(">=", Var(port), Lit(v0 - d))
    if shape == 1:
        return Cmp("<=", Var(port), Lit(v0 + d))
    return BoolOp("and", (Cmp(">=", Var(port), Lit(v0 - d)),
                          Cmp("<", Var(port), Lit(v0 + d + rng.randint(1, 9)))))


def gen_spec(seed: int, max_depth: int = 3, max_children: int = 3) -> SamSpec:
    """Deterministic random spec; always passes ``validate_spec``."""
    if max_depth < 1 or max_children < 1:
        raise ValueError("max_depth and max_children must be positive")
    rng = random.Random(f"samcheck-spec-{seed}-{max_depth}-{max_children}")
    root = _Builder(rng, max_children).build(max_depth)
    zeros: dict = {}
    _zero_values(root, {i: 0 for i in root.inputs}, zeros)
    components, registrations = {}, []
    for node in _walk(root):
        pres = tuple(_pre(rng, i, zeros[node.name][i]) for i in node.inputs
                     if rng.random() < 0.7)
        posts = tuple(Cmp("=", Var(o), _affine_expr(*node.forms[o], node.inputs))
                      for o in node.outputs)
        entry, exit_ = f"{node.name}.run", f"{node.name}.run!"
        allowable = frozenset({f"{node.name}.log"}) if node.allowable else frozenset()
        components[node.name] = ComponentDef(
            name=node.name,
            inputs=tuple(Port(i, "input", "int") for i in node.inputs),
            outputs=tuple(Port(o, "output", "int") for o in node.outputs),
            children=tuple(k.name for k in node.children),
            data_links=tuple(DataLink(s, t) for s, t in node.links),
            control_links=tuple(ControlLink(s, t) for s, t in node.control),
            entry_events=frozenset({entry}),
            exit_events=frozenset({exit_}),
            allowable_events=allowable,
            preconditions=pres,
            postconditions=posts,
        )
        registrations.append(EventRegistration(
            entry, node.name, "entry", tuple((i, (node.name, i)) for i in node.inputs)))
        registrations.append(EventRegistration(
            exit_, node.name, "exit", tuple((o, (node.name, o)) for o in node.outputs)))
        if node.allowable:
            registrations.append(EventRegistration(f"{node.name}.log", node.name, "allowable"))
    return SamSpec(root.name, components, tuple(registrations))


def _default(sort, rng=None):
    if sort == "int":
        return rng.randint(-3, 3) if rng else 0
    if sort == "float":
        return float(rng.randint(-3, 3)) if rng else 0.0
    if sort == "bool":
        return rng.random() < 0.5 if rng else False
    if sort == "string":
        return ""
    return ()


def gen_inputs(spec: SamSpec, seed: int) -> Environment:
    """Top-level inputs for which :func:`predict_trace` succeeds, if any are found."""
    from .predictor import predict_trace

    rng = random.Random(f"samcheck-inputs-{seed}")
    top = spec.component(spec.top)
    for _ in range(32):
        cand = {f"{top.name}.{p.name}": _default(p.value_sort, rng) for p in top.inputs}
        try:
            predict_trace(spec, cand, seed)
        except SamError:
            continue
        return Environment(cand)
    return Environment({f"{top.name}.{p.name}": _default(p.value_sort) for p in top.inputs})
