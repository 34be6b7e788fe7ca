"""``samcheck`` command line.

Exit status carries the verdict: 0 normal (or clean validation),
2 compromised, 3 incomplete, 4 spec-evaluation-error, 1 for usage, parse,
validation and I/O problems.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import SamError
from .harness import run_seed
from .model import validate_spec
from .monitor import Outcome, monitor_trace
from .mutate import KINDS, Mutation, mutate
from .parser import ParseError, parse_spec
from .predictor import ensure_valid, predict_trace
from .traceio import (canonical_json, decode_value, dumps_trace, load_trace,
                      run_report, save_trace)

EXIT = {Outcome.NORMAL: 0, Outcome.COMPROMISED: 2, Outcome.INCOMPLETE: 3, Outcome.ERROR: 4}
EXIT_USAGE = 1

_COLORS = {"normal": "32", "compromised": "31", "incomplete": "33",
           "spec-evaluation-error": "35", "error": "31"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _paint(text: str, tone: str) -> str:
    if os.environ.get("SAMCHECK_COLOR", "0") != "1":
        return text
    return f"\x1b[{_COLORS.get(tone, '0')}m{text}\x1b[0m"


def _fail(message: str) -> int:
    print(_paint("error", "error") + f": {message}", file=sys.stderr)
    return EXIT_USAGE


def _load_spec(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SamError(f"{path}: {exc}", "io-error") from None
    try:
        return parse_spec(text)
    except ParseError as exc:
        raise SamError(f"{path}:{exc}", "parse-error") from None


def parse_bindings(arg: str) -> dict:
    """``x=3,flag=true,name="a"`` or a JSON file of plain or sort-tagged values."""
    path = Path(arg)
    if path.is_file():
        raw = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise SamError(f"{arg}: expected a JSON object", "bad-inputs")
        items = raw.items()
    else:
        items = []
        pieces = re.split(r",\s*(?=[A-Za-z_][\w.]*\s*=)", arg)
        for part in filter(None, (p.strip() for p in pieces)):
            key, sep, text = part.partition("=")
            if not sep:
                raise SamError(f"binding {part!r} is not name=value", "bad-inputs")
            try:
                items.append((key.strip(), json.loads(text)))
            except ValueError:
                raise SamError(f"binding {part!r}: value is not a literal", "bad-inputs") from None
    out = {}
    for key, value in items:
        if isinstance(value, dict):
            value = decode_value(value)
        elif isinstance(value, list):
            value = tuple(value)
        out[key] = value
    return out


# ---------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    spec = _load_spec(args.spec)
    report = validate_spec(spec)
    for d in report:
        print(f"{args.spec}: {d}")
    if report:
        print(_paint(f"{len(report)} problem(s)", "error"))
        return EXIT_USAGE
    print(_paint("ok", "normal") + f": {len(spec.components)} component(s), "
          f"{len(spec.registrations)} registration(s)")
    return 0


def cmd_monitor(args) -> int:
    spec = _load_spec(args.spec)
    ensure_valid(spec)
    trace = load_trace(args.trace)
    t0 = time.perf_counter()
    verdict, steps = monitor_trace(spec, trace)
    elapsed = (time.perf_counter() - t0) * 1000
    report = run_report(spec, trace, verdict, len(steps), elapsed)
    line = _paint(verdict.outcome.value, verdict.outcome.value)
    if verdict.report is not None:
        r = verdict.report
        where = f" in {r.component}" if r.component else ""
        res = ", ".join(f"{c}.{p}" for c, p in r.resources) or "none"
        line += f" at seq {r.at_seq}: {r.reason}{where}; resources: {res}"
        for f in r.failed_conditions:
            line += f"\n  {f.component} {f.kind}[{f.index}] {f.expr}"
    elif verdict.error:
        line += f": {verdict.error}"
    print(line)
    if args.report:
        Path(args.report).write_text(report.dumps() + "\n", encoding="utf-8")
    if args.steps:
        Path(args.steps).write_text(
            "".join(canonical_json(s.to_json()) + "\n" for s in steps), encoding="utf-8")
    return EXIT[verdict.outcome]


def cmd_predict(args) -> int:
    spec = _load_spec(args.spec)
    inputs = parse_bindings(args.inputs) if args.inputs else {}
    trace = predict_trace(spec, inputs, args.seed)
    if args.output:
        save_trace(trace, args.output)
    else:
        sys.stdout.write(dumps_trace(trace))
    return 0


def cmd_mutate(args) -> int:
    trace = load_trace(args.trace)
    out = mutate(trace, Mutation(args.kind, args.at, args.seed))
    if args.output:
        save_trace(out, args.output)
    else:
        sys.stdout.write(dumps_trace(out))
    return 0


def _fuzz_one(job):
    seed, depth, children = job
    r = run_seed(seed, depth, children)
    return seed, r.problems, len(r.mutations)


def cmd_fuzz(args) -> int:
    jobs = [(s, args.depth, args.children) for s in range(args.start, args.start + args.seeds)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_fuzz_one, jobs, chunksize=8))
    else:
        results = [_fuzz_one(j) for j in jobs]
    problems = [p for _, ps, _ in results for p in ps]
    mutated = sum(n for _, _, n in results)
    for p in problems:
        print(p)
    tone = "normal" if not problems else "error"
    print(_paint(f"{len(results)} spec(s), {mutated} mutant(s), {len(problems)} problem(s)", tone))
    return 0 if not problems else EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="samcheck", description="Check runtime traces against a SAM spec.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="parse and validate a .sam spec")
    v.add_argument("spec")
    v.set_defaults(func=cmd_validate)

    m = sub.add_parser("monitor", help="judge a trace against a spec")
    m.add_argument("--spec", required=True)
    m.add_argument("--trace", required=True)
    m.add_argument("--report", help="write the run report (JSON) here")
    m.add_argument("--steps", help="write every monitor step (NDJSON) here")
    m.set_defaults(func=cmd_monitor)

    pr = sub.add_parser("predict", help="generate the trace a SAM model predicts")
    pr.add_argument("--spec", required=True)
    pr.add_argument("--inputs", default="", help="name=value,... or a JSON file")
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("-o", "--output")
    pr.set_defaults(func=cmd_predict)

    mu = sub.add_parser("mutate", help="apply one attack mutation to a trace")
    mu.add_argument("--trace", required=True)
    mu.add_argument("--kind", required=True, choices=KINDS)
    mu.add_argument("--at", type=int, required=True, help="target seq")
    mu.add_argument("--seed", type=int, default=0)
    mu.add_argument("-o", "--output")
    mu.set_defaults(func=cmd_mutate)

    f = sub.add_parser("fuzz", help="generator + oracle + mutation loop")
    f.add_argument("--seeds", type=int, default=100)
    f.add_argument("--start", type=int, default=0)
    f.add_argument("--depth", type=int, default=3)
    f.add_argument("--children", type=int, default=3)
    f.add_argument("--jobs", type=int, default=1)
    f.set_defaults(func=cmd_fuzz)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SamError as exc:
        return _fail(f"{exc.kind}: {exc.message}")


if __name__ == "__main__":
    sys.exit(main())
