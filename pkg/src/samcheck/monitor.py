"""The execution monitor: replay observations against a SAM model.

Each event is classified (entry, exit, allowable or unexpected) from the
registrations and the current component modes, then applied.  Failed
pre/postconditions and unexpected events flip the session flag to
compromised and produce a :class:`DiagnosisReport`; nothing is accepted
after that.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

from .conditions import Environment, free_vars, qualify
from .errors import BottomState, MalformedTrace, SpecEvaluationError
from .events import RtEvent, Trace
from .model import ROLES, SamSpec, pattern_matches
from .predictor import (CheckResult, ExecState, Flag, Mode, check_post, check_pre,
                        children_running, input_complete, is_active, propagate,
                        set_mode, settle, startup)

REASONS = ("failed-precondition", "failed-postcondition", "unexpected-event",
           "illegal-mode", "incomplete-input")


@dataclass(frozen=True)
class EventClass:
    kind: str                      # "entry" | "exit" | "allowable" | "unexpected"
    component: Optional[str] = None

    def __str__(self):
        return f"{self.kind}({self.component})" if self.component else self.kind


UNEXPECTED = EventClass("unexpected")


@dataclass(frozen=True)
class DiagnosisReport:
    at_seq: int
    component: Optional[str]
    reason: str
    failed_conditions: tuple = ()
    resources: tuple = ()          # sorted ((component, port), ...)

    def to_json(self) -> dict:
        return {
            "at_seq": self.at_seq,
            "component": self.component,
            "reason": self.reason,
            "failed_conditions": [f.to_json() for f in self.failed_conditions],
            "resources": [f"{c}.{p}" for c, p in self.resources],
        }


@dataclass(frozen=True)
class Cause:
    """What made a rule escalate; input to :func:`diagnose`."""
    reason: str
    event: RtEvent
    component: Optional[str] = None
    check: Optional[CheckResult] = None
    registration: object = None


class Outcome(str, enum.Enum):
    NORMAL = "normal"
    COMPROMISED = "compromised"
    INCOMPLETE = "incomplete"
    ERROR = "spec-evaluation-error"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    report: Optional[DiagnosisReport] = None
    error: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "verdict": self.outcome.value,
            "report": self.report.to_json() if self.report else None,
            "error": self.error,
        }


@dataclass(frozen=True)
class MonitorStep:
    index: int
    event: RtEvent
    pre_env: Environment
    post_env: Environment
    pre_state: ExecState
    post_state: ExecState
    event_class: EventClass
    checks: tuple = ()
    report: Optional[DiagnosisReport] = None
    note: Optional[str] = None

    def to_json(self) -> dict:
        from .traceio import encode_env, event_to_json
        return {
            "index": self.index,
            "event": event_to_json(self.event),
            "class": str(self.event_class),
            "pre_env": encode_env(self.pre_env),
            "post_env": encode_env(self.post_env),
            "pre_state": self.pre_state.to_json(),
            "post_state": self.post_state.to_json(),
            "checks": [c.to_json() for c in self.checks],
            "report": self.report.to_json() if self.report else None,
            "note": self.note,
        }


# ---------------------------------------------------------------- classification

def _matches(spec: SamSpec, method: str) -> dict:
    cache = spec._derived.setdefault("matches", {})
    hit = cache.get(method)
    if hit is None:
        hit = {}
        for reg in spec.registrations:
            if reg.role not in hit and pattern_matches(reg.method, method):
                hit[reg.role] = reg
        cache[method] = hit
    return hit


def classify(spec: SamSpec, state: ExecState, ev: RtEvent) -> EventClass:
    if ev.kind == "startup" or ev.method is None:
        return UNEXPECTED
    regs = _matches(spec, ev.method)
    reg = regs.get("entry")
    if reg is not None:
        c, mode = reg.component, state.modes[reg.component]
        if c == spec.top:
            if mode is Mode.RUNNING and not is_active(spec, state, c):
                return EventClass("entry", c)
        elif mode is Mode.READY:
            return EventClass("entry", c)
    reg = regs.get("exit")
    if reg is not None:
        c = reg.component
        if is_active(spec, state, c) and not children_running(spec, state, c):
            return EventClass("exit", c)
    reg = regs.get("allowable")
    if reg is not None and state.modes[reg.component] in (Mode.READY, Mode.RUNNING):
        return EventClass("allowable", reg.component)
    return UNEXPECTED


# ---------------------------------------------------------------- diagnosis

def diagnose(env: Environment, state: ExecState, cause: Cause) -> DiagnosisReport:
    """Attribute an escalation to a component and the ports it implicates."""
    failures = cause.check.failures if cause.check is not None else ()
    resources = set()
    for f in failures:
        if f.condition is not None:
            for name in free_vars(f.condition, f.component):
                comp, _, port = name.partition(".")
                resources.add((comp, port))
    if cause.registration is not None:
        for key, (comp, port) in cause.registration.binding:
            if key in cause.event.payload:
                resources.add((comp, port))
    return DiagnosisReport(cause.event.seq, cause.component, cause.reason,
                           tuple(failures), tuple(sorted(resources)))


# ---------------------------------------------------------------- one step

def _payload_bindings(reg, ev) -> dict:
    return {f"{comp}.{port}": ev.payload[key]
            for key, (comp, port) in reg.binding if key in ev.payload}


def step(spec: SamSpec, env: Environment, state: ExecState, ev: RtEvent, index: int = 0):
    """Apply one observation.  Returns ``(env', state', MonitorStep)``.

    Raises :class:`BottomState` once the session is compromised or diverged,
    and :class:`SpecEvaluationError` when a condition cannot be evaluated.
    """
    if state.bottom or state.flag is Flag.COMPROMISED:
        raise BottomState(f"event seq {ev.seq} arrived after the session terminated")
    cls = classify(spec, state, ev)
    pre_env, pre_state = env, state
    checks: list = []
    cause = None
    note = None

    if cls.kind == "entry":
        c = cls.component
        reg = _matches(spec, ev.method)["entry"]
        bound = _payload_bindings(reg, ev)
        env = env.bind_many(bound)
        state = replace(state, ports=state.ports.bind_many(bound),
                        entered=state.entered | {c})
        if input_complete(spec, state, c):
            res = check_pre(spec, state, c)
            checks.append(res)
            if not res.passed:
                cause = Cause("failed-precondition", ev, c, res)
            else:
                if c != spec.top:
                    state = set_mode(state, c, Mode.RUNNING)
                state, failed = settle(spec, state)
                if failed is not None:
                    checks.append(failed)
                    cause = Cause("failed-precondition", ev, failed.component, failed)
        else:
            note = "incomplete-input"
    elif cls.kind == "exit":
        c = cls.component
        reg = _matches(spec, ev.method)["exit"]
        bound = _payload_bindings(reg, ev)
        env = env.bind_many(bound)
        state = replace(state, ports=state.ports.bind_many(bound))
        state = set_mode(state, c, Mode.COMPLETED)
        state = propagate(spec, state, c)
        res = check_post(spec, state, c)
        checks.append(res)
        if not res.passed:
            cause = Cause("failed-postcondition", ev, c, res)
        else:
            state, failed = settle(spec, state)
            if failed is not None:
                checks.append(failed)
                cause = Cause("failed-precondition", ev, failed.component, failed)
    elif cls.kind == "unexpected":
        regs = _matches(spec, ev.method) if ev.method is not None else {}
        reg = next((regs[r] for r in ROLES if r in regs), None)
        if reg is None:
            cause = Cause("unexpected-event", ev)
        else:
            cause = Cause("illegal-mode", ev, reg.component, registration=reg)

    report = None
    if cause is not None:
        state = replace(state, flag=Flag.COMPROMISED)
        report = diagnose(env, state, cause)
    record = MonitorStep(index, ev, pre_env, env, pre_state, state, cls,
                         tuple(checks), report, note)
    return env, state, record


# ---------------------------------------------------------------- whole trace

def initial(spec: SamSpec, first: RtEvent):
    """State and environment before the first post-startup event."""
    state = startup(spec)
    env = Environment()
    if first.payload:
        top = spec.component(spec.top)
        names = {p.name for p in top.inputs}
        bound = {}
        for key, value in first.payload.items():
            q = qualify(key, spec.top)
            comp, _, port = q.partition(".")
            if comp != spec.top or port not in names:
                raise MalformedTrace(f"startup payload key {key!r} is not a top input")
            bound[q] = value
        env = env.bind_many(bound)
        state = replace(state, ports=state.ports.bind_many(bound))
    return env, state


def check_trace_shape(trace: Trace) -> None:
    if not trace.events:
        raise MalformedTrace("empty trace: expected a startup event")
    first = trace.events[0]
    if first.kind != "startup":
        raise MalformedTrace(f"first event is {first.kind!r}, expected startup")
    if first.method is not None:
        raise MalformedTrace("startup event must not name a method")
    for i, ev in enumerate(trace.events):
        if ev.seq != i:
            raise MalformedTrace(f"non-dense seq: expected {i}, got {ev.seq}")


def monitor_trace(spec: SamSpec, trace: Trace):
    """Run the monitor over ``trace``.  Returns ``(Verdict, [MonitorStep, ...])``."""
    check_trace_shape(trace)
    env, state = initial(spec, trace.events[0])
    steps: list = []
    for i, ev in enumerate(trace.events[1:]):
        try:
            env, state, record = step(spec, env, state, ev, i)
        except SpecEvaluationError as exc:
            return Verdict(Outcome.ERROR, error=str(exc)), steps
        steps.append(record)
        if state.flag is Flag.COMPROMISED:
            return Verdict(Outcome.COMPROMISED, record.report), steps
    if state.modes[spec.top] is Mode.COMPLETED:
        return Verdict(Outcome.NORMAL), steps
    return Verdict(Outcome.INCOMPLETE), steps
