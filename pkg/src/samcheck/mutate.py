"""Adversarial trace mutations used to check that the monitor notices attacks."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .conditions import sort_of
from .errors import InapplicableMutation
from .events import RtEvent, Trace

KINDS = ("corrupt-value", "swap-order", "drop-exit", "inject-unexpected", "replay-entry")
INJECTED_METHOD = "___injected.___"


@dataclass(frozen=True)
class Mutation:
    kind: str
    target_seq: int
    seed: int = 0


def _corrupt(value, rng):
    s = sort_of(value)
    if s == "bool":
        return not value
    if s == "int":
        return rng.choice([v for v in range(-16, 17) if v != value])
    if s == "float":
        return rng.choice([float(v) for v in range(-16, 17) if float(v) != value])
    if s == "string":
        return value + rng.choice("abcxyz")
    if value:
        return (_corrupt(value[0], rng),) + value[1:]
    return (0,)


def matching_exit(trace: Trace, i: int):
    """Position of the exit closing the entry at ``i`` (by entry/exit nesting)."""
    depth = 0
    for j in range(i, len(trace.events)):
        kind = trace.events[j].kind
        if kind == "method-entry":
            depth += 1
        elif kind == "method-exit":
            depth -= 1
            if depth == 0:
                return j
    return None


def applicable(trace: Trace, kind: str, target: int) -> bool:
    try:
        mutate(trace, Mutation(kind, target))
    except InapplicableMutation:
        return False
    return True


def applicable_targets(trace: Trace, kind: str) -> list:
    return [t for t in range(len(trace.events) + 1) if applicable(trace, kind, t)]


def mutate(trace: Trace, m: Mutation) -> Trace:
    """Apply exactly one semantic change; the result has dense seq numbers again."""
    events = list(trace.events)
    n, t = len(events), m.target_seq
    rng = random.Random(m.seed)

    def target(kinds):
        if not 0 <= t < n or events[t].kind not in kinds:
            raise InapplicableMutation(f"{m.kind} needs a {'/'.join(kinds)} event at seq {t}")
        return events[t]

    if m.kind == "corrupt-value":
        ev = target(("method-entry", "method-exit"))
        if not ev.payload:
            raise InapplicableMutation(f"event {t} carries no payload to corrupt")
        key = rng.choice(sorted(ev.payload))
        payload = dict(ev.payload)
        payload[key] = _corrupt(payload[key], rng)
        events[t] = RtEvent(ev.seq, ev.kind, ev.method, payload)
    elif m.kind == "swap-order":
        target(("method-entry",))
        j = matching_exit(trace, t)
        if j is None:
            raise InapplicableMutation(f"entry at seq {t} has no matching exit")
        events[t], events[j] = events[j], events[t]
    elif m.kind == "drop-exit":
        target(("method-exit",))
        del events[t]
    elif m.kind == "inject-unexpected":
        if not 1 <= t <= n:
            raise InapplicableMutation(f"cannot inject at seq {t}")
        events.insert(t, RtEvent(t, "other", INJECTED_METHOD, {}))
    elif m.kind == "replay-entry":
        ev = target(("method-entry",))
        events.insert(t + 1, RtEvent(t + 1, ev.kind, ev.method, dict(ev.payload)))
    else:
        raise InapplicableMutation(f"unknown mutation kind {m.kind!r}")
    return Trace.reindexed(events, trace.meta)
