"""Exception hierarchy shared by every samcheck module."""
from __future__ import annotations


class SamError(Exception):
    """Base class; ``kind`` is the stable, machine-readable error tag."""

    kind = "error"

    def __init__(self, message: str, kind: str | None = None):
        super().__init__(message)
        if kind is not None:
            self.kind = kind
        self.message = message


class EvalError(SamError):
    """A condition could not be evaluated (unbound name, bad sorts, ...)."""

    def __init__(self, kind: str, detail: str):
        super().__init__(f"{kind}: {detail}", kind)
        self.detail = detail


class SpecEvaluationError(SamError):
    """An EvalError surfaced while checking a component's conditions."""

    kind = "spec-evaluation-error"

    def __init__(self, message: str, cause: EvalError | None = None,
                 component: str | None = None, condition_kind: str | None = None,
                 index: int | None = None):
        super().__init__(message)
        self.cause = cause
        self.component = component
        self.condition_kind = condition_kind
        self.index = index


class SplitAmbiguity(SpecEvaluationError):
    kind = "split-ambiguity"


class InvalidSpec(SamError):
    kind = "invalid-spec"

    def __init__(self, report):
        lines = "; ".join(str(d) for d in report)
        super().__init__(f"spec failed validation: {lines}")
        self.report = report


class UnknownComponent(SamError):
    kind = "unknown-component"


class IllegalTransition(SamError):
    kind = "illegal-transition"


class BottomState(SamError):
    kind = "bottom-state"


class MalformedTrace(SamError):
    kind = "malformed-trace"


class TraceFormatError(SamError):
    """Raised by the trace loader: ``schema-error``, ``seq-gap`` or ``io-error``."""

    def __init__(self, kind: str, message: str, line: int | None = None,
                 field: str | None = None, expected: int | None = None,
                 got: int | None = None):
        super().__init__(message, kind)
        self.line = line
        self.field = field
        self.expected = expected
        self.got = got


class InapplicableMutation(SamError):
    kind = "inapplicable-mutation"


class PredictionError(SamError):
    kind = "unsynthesizable-postcondition"
