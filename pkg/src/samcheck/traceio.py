"""On-disk formats: NDJSON traces, typed values, verdict and run reports."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .conditions import sort_of
from .errors import TraceFormatError
from .events import KINDS, RtEvent, Trace


def encode_value(v) -> dict:
    s = sort_of(v)
    if s == "list":
        return {"list": [encode_value(x) for x in v]}
    return {s: v}


def decode_value(obj):
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError(f"expected a one-key sort object, got {obj!r}")
    (sort, raw), = obj.items()
    if sort == "int" and isinstance(raw, int) and not isinstance(raw, bool):
        return raw
    if sort == "float" and isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return float(raw)
    if sort == "bool" and isinstance(raw, bool):
        return raw
    if sort == "string" and isinstance(raw, str):
        return raw
    if sort == "list" and isinstance(raw, list):
        items = tuple(decode_value(x) for x in raw)
        if len({sort_of(x) for x in items}) > 1:
            raise ValueError("list value mixes sorts")
        return items
    raise ValueError(f"bad {sort} value {raw!r}")


def encode_env(env) -> dict:
    return {k: encode_value(v) for k, v in sorted(env.items())}


def event_to_json(ev: RtEvent) -> dict:
    obj = {"seq": ev.seq, "kind": ev.kind}
    if ev.method is not None:
        obj["method"] = ev.method
    obj["payload"] = {k: encode_value(v) for k, v in sorted(ev.payload.items())}
    return obj


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def dumps_trace(trace: Trace) -> str:
    return "".join(canonical_json(event_to_json(ev)) + "\n" for ev in trace.events)


def _event_from_json(obj, line: int) -> RtEvent:
    if not isinstance(obj, dict):
        raise TraceFormatError("schema-error", f"line {line}: record is not an object",
                               line=line, field="<record>")
    for key in ("seq", "kind"):
        if key not in obj:
            raise TraceFormatError("schema-error", f"line {line}: missing {key!r}",
                                   line=line, field=key)
    seq, kind = obj["seq"], obj["kind"]
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
        raise TraceFormatError("schema-error", f"line {line}: bad seq {seq!r}",
                               line=line, field="seq")
    if kind not in KINDS:
        raise TraceFormatError("schema-error", f"line {line}: unknown kind {kind!r}",
                               line=line, field="kind")
    method = obj.get("method")
    if kind != "startup" and not isinstance(method, str):
        raise TraceFormatError("schema-error", f"line {line}: missing method",
                               line=line, field="method")
    if kind == "startup" and method is not None:
        raise TraceFormatError("schema-error", f"line {line}: startup names a method",
                               line=line, field="method")
    raw = obj.get("payload", {})
    if not isinstance(raw, dict):
        raise TraceFormatError("schema-error", f"line {line}: payload is not an object",
                               line=line, field="payload")
    try:
        payload = {k: decode_value(v) for k, v in raw.items()}
    except ValueError as exc:
        raise TraceFormatError("schema-error", f"line {line}: payload: {exc}",
                               line=line, field="payload") from None
    extra = set(obj) - {"seq", "kind", "method", "payload"}
    if extra:
        raise TraceFormatError("schema-error", f"line {line}: unknown field {sorted(extra)[0]!r}",
                               line=line, field=sorted(extra)[0])
    return RtEvent(seq, kind, method, payload)


def loads_trace(text: str, meta: str = "") -> Trace:
    events = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except ValueError as exc:
            raise TraceFormatError("schema-error", f"line {lineno}: invalid JSON ({exc.msg})",
                                   line=lineno, field="<json>") from None
        ev = _event_from_json(obj, lineno)
        expected = len(events)
        if ev.seq != expected:
            raise TraceFormatError("seq-gap", f"line {lineno}: expected seq {expected}, got {ev.seq}",
                                   line=lineno, expected=expected, got=ev.seq)
        events.append(ev)
    return Trace(tuple(events), meta)


def load_trace(path) -> Trace:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise TraceFormatError("io-error", f"{path}: {exc}") from None
    return loads_trace(text, meta=str(path))


def save_trace(trace: Trace, path) -> None:
    try:
        Path(path).write_text(dumps_trace(trace), encoding="utf-8", newline="\n")
    except OSError as exc:
        raise TraceFormatError("io-error", f"{path}: {exc}") from None


def sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RunReport:
    verdict: object
    steps: int
    spec_hash: str
    trace_hash: str
    duration_ms: int = 0

    def to_json(self, timing: bool = True) -> dict:
        obj = {"verdict": self.verdict.to_json(), "steps": self.steps,
               "spec_hash": self.spec_hash, "trace_hash": self.trace_hash}
        if timing:
            obj["duration_ms"] = self.duration_ms
        return obj

    def dumps(self, timing: bool = True) -> str:
        return canonical_json(self.to_json(timing))


def run_report(spec, trace, verdict, steps: int, duration_ms: int = 0) -> RunReport:
    from .parser import render_spec
    return RunReport(verdict, steps, sha256(render_spec(spec)), sha256(dumps_trace(trace)),
                     int(duration_ms))
