"""Runtime observations: single events and ordered traces."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

KINDS = ("startup", "method-entry", "method-exit", "other")


@dataclass(frozen=True)
class RtEvent:
    seq: int
    kind: str
    method: Optional[str] = None
    payload: dict = field(default_factory=dict)

    def with_seq(self, seq: int) -> "RtEvent":
        return RtEvent(seq, self.kind, self.method, dict(self.payload))


@dataclass(frozen=True)
class Trace:
    events: tuple
    meta: str = ""

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]

    @classmethod
    def reindexed(cls, events, meta: str = "") -> "Trace":
        """Build a trace with dense ``seq`` numbers 0..n-1."""
        return cls(tuple(e.with_seq(i) for i, e in enumerate(events)), meta)
