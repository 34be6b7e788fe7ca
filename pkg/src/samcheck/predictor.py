"""Execution state and the specification-side interpreter.

This module holds everything needed to *run the model*: startup, mode
changes, data propagation gated by control links and splits, readiness and
condition checks, and :func:`predict_trace`, which executes the model to
produce an observation stream the monitor must accept.
"""
from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field, replace
from typing import Optional

from .conditions import (Environment, EvalError, Lit, eval_cond, eval_value, qualify,
                         render_expr, same_value, sort_of, subexpressions)
from .errors import (BottomState, IllegalTransition, InvalidSpec, PredictionError,
                     SpecEvaluationError, SplitAmbiguity)
from .events import RtEvent, Trace
from .model import SamSpec, validate_spec

SEARCH_RANGE = range(-16, 17)
MAX_CANDIDATES = 50_000


class Mode(str, enum.Enum):
    UNINITIALIZED = "uninitialized"
    READY = "ready"
    RUNNING = "running"
    COMPLETED = "completed"


class Flag(str, enum.Enum):
    NORMAL = "normal"
    COMPROMISED = "compromised"


_LEGAL = {
    (Mode.UNINITIALIZED, Mode.READY),
    (Mode.READY, Mode.RUNNING),
    (Mode.RUNNING, Mode.COMPLETED),
}


@dataclass(frozen=True)
class ExecState:
    modes: dict
    flag: Flag = Flag.NORMAL
    ports: Environment = Environment()
    bottom: bool = False
    entered: frozenset = frozenset()   # components whose entry event was accepted

    def mode(self, c: str) -> Mode:
        return self.modes[c]

    def to_json(self) -> dict:
        from .traceio import encode_value
        return {
            "modes": {k: v.value for k, v in sorted(self.modes.items())},
            "flag": self.flag.value,
            "ports": {k: encode_value(v) for k, v in sorted(self.ports.items())},
            "bottom": self.bottom,
            "entered": sorted(self.entered),
        }


@dataclass(frozen=True)
class Failure:
    component: str
    kind: str      # "pre" | "post"
    index: int
    expr: str
    condition: object = field(default=None, compare=False, repr=False)

    def to_json(self) -> dict:
        return {"component": self.component, "kind": self.kind,
                "index": self.index, "expr": self.expr}


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    failures: tuple = ()
    component: Optional[str] = None
    kind: Optional[str] = None

    def to_json(self) -> dict:
        return {"component": self.component, "kind": self.kind, "passed": self.passed,
                "failures": [f.to_json() for f in self.failures]}


# ---------------------------------------------------------------- basics

def ensure_valid(spec: SamSpec) -> None:
    ok = spec._derived.get("valid")
    if ok is None:
        report = validate_spec(spec)
        spec._derived["report"] = report
        spec._derived["valid"] = ok = not report
    if not ok:
        raise InvalidSpec(spec._derived["report"])


def startup(spec: SamSpec) -> ExecState:
    """Initial state: whole tree instantiated, top running, everything else idle."""
    ensure_valid(spec)
    modes = {c: Mode.UNINITIALIZED for c in spec.preorder()}
    modes[spec.top] = Mode.RUNNING
    return ExecState(modes=modes)


def set_mode(state: ExecState, c: str, mode: Mode) -> ExecState:
    if state.bottom:
        raise BottomState(f"no transition is possible in the bottom state ({c} -> {mode.value})")
    old = state.modes[c]
    if (old, mode) not in _LEGAL:
        raise IllegalTransition(f"{c}: {old.value} -> {mode.value}")
    modes = dict(state.modes)
    modes[c] = mode
    return replace(state, modes=modes)


def diverge(state: ExecState) -> ExecState:
    """Lift to bottom: an absorbing state in which nothing further happens."""
    return replace(state, bottom=True)


def input_complete(spec: SamSpec, state: ExecState, c: str) -> bool:
    ports = state.ports
    return all(f"{c}.{p.name}" in ports for p in spec.component(c).inputs)


def is_active(spec: SamSpec, state: ExecState, c: str) -> bool:
    """Running, entry accepted, and all inputs present."""
    return (state.modes[c] is Mode.RUNNING and c in state.entered
            and input_complete(spec, state, c))


def children_running(spec: SamSpec, state: ExecState, c: str) -> list:
    return [ch for ch in spec.component(c).children if state.modes[ch] is Mode.RUNNING]


def _check(spec, state, c, kind):
    cd = spec.component(c)
    conds = (cd.preconditions if kind == "pre" else cd.postconditions) + cd.invariants
    failures = []
    for i, cond in enumerate(conds):
        try:
            ok = eval_cond(cond, state.ports, c)
        except EvalError as exc:
            raise SpecEvaluationError(
                f"{c} {kind}[{i}] {render_expr(cond)}: {exc}", exc, c, kind, i) from None
        if not ok:
            failures.append(Failure(c, kind, i, render_expr(cond), cond))
    return CheckResult(not failures, tuple(failures), c, kind)


def check_pre(spec: SamSpec, state: ExecState, c: str) -> CheckResult:
    return _check(spec, state, c, "pre")


def check_post(spec: SamSpec, state: ExecState, c: str) -> CheckResult:
    return _check(spec, state, c, "post")


# ---------------------------------------------------------------- control + data flow

def _guard(expr, state, owner) -> bool:
    try:
        return eval_cond(expr, state.ports, owner)
    except EvalError as exc:
        raise SpecEvaluationError(f"{owner} guard {render_expr(expr)}: {exc}", exc, owner) from None


def select_branch(spec: SamSpec, state: ExecState, split) -> Optional[int]:
    """Index of the split branch whose guard holds, None if none does."""
    hits = [i for i, br in enumerate(split.branches) if _guard(br.guard, state, split.owner)]
    if len(hits) > 1:
        raise SplitAmbiguity(f"split in {split.owner}: branches {hits} all hold")
    return hits[0] if hits else None


def control_link_on(spec: SamSpec, state: ExecState, owner: str, link) -> bool:
    if link.source == owner:
        if not is_active(spec, state, owner):
            return False
    elif state.modes[link.source] is not Mode.COMPLETED:
        return False
    for sp in spec.splits:
        if sp.owner != owner or not any(link.ident in br.links for br in sp.branches):
            continue
        chosen = select_branch(spec, state, sp)
        if chosen is None or link.ident not in sp.branches[chosen].links:
            return False
    return link.guard is None or _guard(link.guard, state, owner)


def control_enabled(spec: SamSpec, state: ExecState, owner: str, target: str) -> bool:
    """A child with no incoming control links is enabled by default."""
    incoming = [cl for cl in spec.component(owner).control_links if cl.target == target]
    if not incoming:
        return True
    return any(control_link_on(spec, state, owner, cl) for cl in incoming)


def _copy_link(spec, state, owner, link) -> Optional[ExecState]:
    src = f"{link.source[0]}.{link.source[1]}"
    if src not in state.ports:
        return None
    target = link.target[0]
    if target == owner:
        if state.modes[owner] is not Mode.RUNNING:
            return None
    else:
        if state.modes[target] not in (Mode.UNINITIALIZED, Mode.READY):
            return None
        if not is_active(spec, state, owner):
            return None
        if not control_enabled(spec, state, owner, target):
            return None
    dst = f"{target}.{link.target[1]}"
    value = state.ports[src]
    if dst in state.ports and same_value(state.ports[dst], value):
        return None
    return replace(state, ports=state.ports.bind(dst, value))


def _owned_links(spec):
    links = spec._derived.get("links")
    if links is None:
        links = [(o, dl) for o in spec.preorder() for dl in spec.components[o].data_links]
        spec._derived["links"] = links
    return links


def propagate(spec: SamSpec, state: ExecState, source: str) -> ExecState:
    """Copy every bound port of ``source`` along its enabled outgoing data links."""
    if state.bottom:
        raise BottomState("cannot propagate in the bottom state")
    for owner, link in _owned_links(spec):
        if link.source[0] != source:
            continue
        new = _copy_link(spec, state, owner, link)
        if new is not None:
            state = new
    return state


def settle(spec: SamSpec, state: ExecState):
    """Propagate along every link and promote idle components to ready.

    Runs to a fixpoint.  A component becomes ready once its parent is active,
    it is control-enabled, its inputs are complete and its preconditions
    pass; a ready component whose inputs change is re-checked.  Returns
    ``(state, failed_check)`` where ``failed_check`` is the first failing
    :class:`CheckResult`, or None.
    """
    if state.bottom:
        raise BottomState("cannot settle the bottom state")
    order = spec.preorder()
    links = _owned_links(spec)
    for _ in range(4 * (len(links) + len(order)) + 4):
        changed = False
        touched = set()
        for owner, link in links:
            new = _copy_link(spec, state, owner, link)
            if new is not None:
                state = new
                changed = True
                touched.add(link.target[0])
        for name in order[1:]:
            mode = state.modes[name]
            if mode is Mode.UNINITIALIZED:
                parent = spec.parent_of(name)
                if not (is_active(spec, state, parent)
                        and control_enabled(spec, state, parent, name)
                        and input_complete(spec, state, name)):
                    continue
                res = check_pre(spec, state, name)
                if not res.passed:
                    return state, res
                state = set_mode(state, name, Mode.READY)
                changed = True
            elif mode is Mode.READY and name in touched:
                res = check_pre(spec, state, name)
                if not res.passed:
                    return state, res
        if not changed:
            break
    return state, None


# ---------------------------------------------------------------- prediction

def _registration(spec, c, role):
    for reg in spec.registrations:
        if reg.component == c and reg.role == role:
            return reg
    raise PredictionError(f"{c} has no {role} registration", "unregistered-event")


def _top_entries(spec, top_def):
    """Entry registrations that together deliver every top input, in order."""
    need = {p.name for p in top_def.inputs}
    regs = []
    for reg in spec.registrations:
        if reg.component != top_def.name or reg.role != "entry":
            continue
        gives = {port for _, (_, port) in reg.binding} & need
        if gives or not regs:
            regs.append(reg)
            need -= gives
        if not need:
            return regs
    if not regs:
        raise PredictionError(f"{top_def.name} has no entry registration", "unregistered-event")
    raise PredictionError(f"top inputs {sorted(need)} are not bound by any entry registration",
                          "unregistered-event")


def _concrete_method(pattern: str) -> str:
    return pattern[:-1] if pattern.endswith("*") else pattern


def _literals(spec):
    lits = spec._derived.get("literals")
    if lits is None:
        lits = []
        for c in spec.components.values():
            for cond in c.preconditions + c.postconditions + c.invariants:
                for sub in subexpressions(cond):
                    if isinstance(sub, Lit):
                        lits.append(sub.value)
        spec._derived["literals"] = lits
    return lits


def _candidates(spec, sort, conds, env, scope, rng):
    seen, out = set(), []

    def add(v):
        if sort_of(v) != sort:
            return
        key = repr(v)
        if key not in seen:
            seen.add(key)
            out.append(v)

    for cond in conds:
        for sub in subexpressions(cond):
            if isinstance(sub, Lit):
                continue
            try:
                add(eval_value(sub, env, scope))
            except EvalError:
                pass
    for v in _literals(spec):
        add(v)
    tail = list(SEARCH_RANGE)
    rng.shuffle(tail)
    if sort == "int":
        for v in tail:
            add(v)
    elif sort == "float":
        for v in tail:
            add(float(v))
    elif sort == "bool":
        add(True)
        add(False)
    elif sort == "string":
        add("")
    elif sort == "list":
        add(())
        for v in tail:
            add((v,))
    return out


def _synthesize(spec, state, c, free, rng):
    """Brute-force values for ``free`` output ports so every post holds."""
    cd = spec.component(c)
    conds = cd.postconditions + cd.invariants
    base = state.ports
    pools = [_candidates(spec, cd.port(p).value_sort, conds, base, c, rng) for p in free]
    for combo in itertools.islice(itertools.product(*pools), MAX_CANDIDATES):
        env = base.bind_many({f"{c}.{p}": v for p, v in zip(free, combo)})
        try:
            if all(eval_cond(cond, env, c) for cond in conds):
                return env
        except EvalError:
            continue
    return None


def predict_trace(spec: SamSpec, top_inputs, seed: int = 0, meta: str = "predicted") -> Trace:
    """Execute the model on ``top_inputs`` and return the trace it should emit.

    The trace is a startup event followed by one entry/exit pair per
    component on the enabled control path, children running in declaration
    order as soon as they are ready.  Output payloads are found by bounded
    search so that every postcondition holds.
    """
    rng = random.Random(seed)
    state = startup(spec)
    top = spec.top
    top_def = spec.component(top)
    given = {qualify(k, top): v for k, v in dict(top_inputs).items()}
    declared = {f"{top}.{p.name}" for p in top_def.inputs}
    if set(given) != declared:
        raise PredictionError(
            f"top inputs must bind exactly {sorted(declared)}, got {sorted(given)}", "bad-inputs")
    events = [RtEvent(0, "startup")]

    def payload_for(reg, ports):
        return {key: state.ports[f"{comp}.{port}"]
                for key, (comp, port) in reg.binding if f"{comp}.{port}" in ports}

    def settled():
        nonlocal state
        state, failed = settle(spec, state)
        if failed is not None:
            f = failed.failures[0]
            raise PredictionError(
                f"precondition {f.expr} of {f.component} fails on predicted data",
                "unsatisfied-precondition")

    def enter(c):
        nonlocal state
        if c == top:
            regs = _top_entries(spec, top_def)
            state = replace(state, ports=state.ports.bind_many(given))
        else:
            regs = [_registration(spec, c, "entry")]
        for reg in regs:
            events.append(RtEvent(len(events), "method-entry", _concrete_method(reg.method),
                                  payload_for(reg, state.ports)))
        state = replace(state, entered=state.entered | {c})
        if not input_complete(spec, state, c):
            raise PredictionError(f"{c} never receives all of its inputs", "incomplete-input")
        res = check_pre(spec, state, c)
        if not res.passed:
            raise PredictionError(f"precondition {res.failures[0].expr} of {c} fails",
                                  "unsatisfied-precondition")
        if c != top:
            state = set_mode(state, c, Mode.RUNNING)
        settled()

    def finish(c):
        nonlocal state
        reg = _registration(spec, c, "exit")
        deliverable = [port for _, (_, port) in reg.binding]
        free = [p for p in deliverable if f"{c}.{p}" not in state.ports]
        env = _synthesize(spec, state, c, free, rng)
        if env is None and len(free) < len(deliverable):
            env = _synthesize(spec, state, c, deliverable, rng)
        if env is None:
            raise PredictionError(f"no outputs of {c} satisfy its postconditions")
        state = replace(state, ports=env)
        events.append(RtEvent(len(events), "method-exit", _concrete_method(reg.method),
                              payload_for(reg, state.ports)))
        state = set_mode(state, c, Mode.COMPLETED)
        state = propagate(spec, state, c)
        settled()

    def run(c):
        done = set()
        while True:
            nxt = next((ch for ch in spec.component(c).children
                        if ch not in done and state.modes[ch] is Mode.READY), None)
            if nxt is None:
                break
            done.add(nxt)
            enter(nxt)
            run(nxt)
        finish(c)

    enter(top)
    run(top)
    return Trace(tuple(events), meta)
