"""samcheck: parse System Architectural Model specs and monitor event traces
against them, flagging the first observation that departs from the model."""

from .conditions import Environment, bind, eval_cond, eval_value
from .errors import (BottomState, EvalError, IllegalTransition, InvalidSpec,
                     MalformedTrace, PredictionError, SamError, SpecEvaluationError)
from .events import RtEvent, Trace
from .model import SamSpec, is_top, subtree, validate_spec
from .monitor import (DiagnosisReport, EventClass, MonitorStep, Outcome, Verdict,
                      classify, diagnose, monitor_trace, step)
from .parser import ParseError, parse_condition, parse_spec, render_spec
from .predictor import (CheckResult, ExecState, Flag, Mode, check_post, check_pre,
                        input_complete, predict_trace, propagate, set_mode, startup)

__all__ = [
    "Environment", "bind", "eval_cond", "eval_value",
    "BottomState", "EvalError", "IllegalTransition", "InvalidSpec", "MalformedTrace",
    "PredictionError", "SamError", "SpecEvaluationError",
    "RtEvent", "Trace", "SamSpec", "is_top", "subtree", "validate_spec",
    "DiagnosisReport", "EventClass", "MonitorStep", "Outcome", "Verdict",
    "classify", "diagnose", "monitor_trace", "step",
    "ParseError", "parse_condition", "parse_spec", "render_spec",
    "CheckResult", "ExecState", "Flag", "Mode", "check_post", "check_pre",
    "input_complete", "predict_trace", "propagate", "set_mode", "startup",
]

__version__ = "0.1.0"
