"""Generator + oracle loop shared by ``samcheck fuzz`` and the acceptance suite."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .events import Trace
from .generate import gen_inputs, gen_spec
from .monitor import Outcome, monitor_trace
from .mutate import KINDS, Mutation, applicable_targets, mutate
from .predictor import predict_trace
from .traceio import RunReport, run_report


@dataclass
class SeedResult:
    seed: int
    spec: object
    trace: Trace
    report: RunReport
    problems: list = field(default_factory=list)
    mutations: list = field(default_factory=list)  # (Mutation, Verdict)


def expected_outcomes(trace: Trace, m: Mutation) -> set:
    """Outcomes a mutation is allowed to produce on a consistent trace.

    Dropping the final exit leaves a benign but unfinished prefix; dropping
    any other exit makes a later event arrive in the wrong mode.
    """
    if m.kind == "drop-exit" and m.target_seq == len(trace.events) - 1:
        return {Outcome.INCOMPLETE}
    return {Outcome.COMPROMISED}


def pick_mutations(trace: Trace, seed: int) -> list:
    """One seeded target per applicable kind."""
    rng = random.Random(f"samcheck-mutations-{seed}")
    picked = []
    for kind in KINDS:
        targets = applicable_targets(trace, kind)
        if targets:
            picked.append(Mutation(kind, rng.choice(targets), seed))
    return picked


def run_seed(seed: int, max_depth: int = 3, max_children: int = 3,
             mutations: bool = True) -> SeedResult:
    spec = gen_spec(seed, max_depth, max_children)
    inputs = gen_inputs(spec, seed)
    trace = predict_trace(spec, inputs, seed, meta=f"seed-{seed}")
    verdict, steps = monitor_trace(spec, trace)
    result = SeedResult(seed, spec, trace, run_report(spec, trace, verdict, len(steps)))
    if verdict.outcome is not Outcome.NORMAL:
        result.problems.append(f"seed {seed}: prediction judged {verdict.outcome.value}")
    if mutations:
        for m in pick_mutations(trace, seed):
            mv, _ = monitor_trace(spec, mutate(trace, m))
            result.mutations.append((m, mv))
            if mv.outcome not in expected_outcomes(trace, m):
                result.problems.append(
                    f"seed {seed}: {m.kind}@{m.target_seq} judged {mv.outcome.value}")
    return result
