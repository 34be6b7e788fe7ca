"""Condition expressions, values and the port environment they run against.

Values are plain Python objects: ``int``, ``float``, ``bool``, ``str`` and
``tuple`` (for lists).  ``bool`` is checked before ``int`` everywhere since
Python treats it as a subclass.
"""
from __future__ import annotations

import json
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from typing import Union

from .errors import EvalError

Value = Union[int, float, bool, str, tuple]

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1

SORTS = ("int", "float", "bool", "string", "list")
CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*", "/")
BOOL_OPS = ("and", "or", "not")


def sort_of(v: Value) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    if isinstance(v, float):
        return "float"
    if isinstance(v, str):
        return "string"
    if isinstance(v, tuple):
        return "list"
    raise TypeError(f"not a SAM value: {v!r}")


def same_value(a: Value, b: Value) -> bool:
    """Structural equality that never confuses ``1``, ``1.0`` and ``True``."""
    sa, sb = sort_of(a), sort_of(b)
    if sa != sb:
        return False
    if sa == "list":
        return len(a) == len(b) and all(same_value(x, y) for x, y in zip(a, b))
    return a == b


def in_bool(flag: bool) -> Value:
    """Inject a Python truth value into the bool sort."""
    return bool(flag)


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class Lit:
    value: Value

    def __eq__(self, other):
        return isinstance(other, Lit) and same_value(self.value, other.value)

    def __hash__(self):
        return hash((sort_of(self.value), repr(self.value)))


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Cmp:
    op: str
    left: "CondExpr"
    right: "CondExpr"


@dataclass(frozen=True)
class Arith:
    op: str
    left: "CondExpr"
    right: "CondExpr"


@dataclass(frozen=True)
class BoolOp:
    op: str
    args: tuple


@dataclass(frozen=True)
class Len:
    arg: "CondExpr"


CondExpr = Union[Lit, Var, Cmp, Arith, BoolOp, Len]


def qualify(name: str, scope: str | None) -> str:
    """Bare ``x`` inside component ``C`` means ``C.x``; dotted names are as written."""
    if "." in name or scope is None:
        return name
    return f"{scope}.{name}"


def free_vars(expr: CondExpr, scope: str | None = None) -> list[str]:
    """Qualified port names referenced by ``expr``, sorted and deduplicated."""
    out: set[str] = set()

    def walk(e):
        if isinstance(e, Var):
            out.add(qualify(e.name, scope))
        elif isinstance(e, (Cmp, Arith)):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, BoolOp):
            for a in e.args:
                walk(a)
        elif isinstance(e, Len):
            walk(e.arg)

    walk(expr)
    return sorted(out)


def subexpressions(expr: CondExpr) -> Iterator[CondExpr]:
    yield expr
    if isinstance(expr, (Cmp, Arith)):
        yield from subexpressions(expr.left)
        yield from subexpressions(expr.right)
    elif isinstance(expr, BoolOp):
        for a in expr.args:
            yield from subexpressions(a)
    elif isinstance(expr, Len):
        yield from subexpressions(expr.arg)


def render_value(v: Value) -> str:
    s = sort_of(v)
    if s == "bool":
        return "true" if v else "false"
    if s == "int":
        return str(v)
    if s == "float":
        text = repr(v)
        if "." not in text and "e" not in text:
            text += ".0"
        return text
    if s == "string":
        return json.dumps(v, ensure_ascii=False)
    return "(list" + "".join(" " + render_value(x) for x in v) + ")"


def render_expr(expr: CondExpr) -> str:
    if isinstance(expr, Lit):
        return render_value(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, (Cmp, Arith)):
        return f"({expr.op} {render_expr(expr.left)} {render_expr(expr.right)})"
    if isinstance(expr, BoolOp):
        return "(" + expr.op + "".join(" " + render_expr(a) for a in expr.args) + ")"
    if isinstance(expr, Len):
        return f"(len {render_expr(expr.arg)})"
    raise TypeError(f"not a condition: {expr!r}")


# ---------------------------------------------------------------- environment

class Environment(Mapping):
    """Immutable map from qualified port names (``Comp.port``) to values."""

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Mapping[str, Value] | None = None):
        self._bindings = dict(bindings or {})

    def __getitem__(self, key: str) -> Value:
        return self._bindings[key]

    def __iter__(self):
        return iter(self._bindings)

    def __len__(self):
        return len(self._bindings)

    def __eq__(self, other):
        if not isinstance(other, Mapping):
            return NotImplemented
        if self.keys() != other.keys():
            return False
        return all(same_value(v, other[k]) for k, v in self._bindings.items())

    def __hash__(self):
        return hash(tuple(sorted((k, repr(v)) for k, v in self._bindings.items())))

    def __repr__(self):
        inner = ", ".join(f"{k}: {v!r}" for k, v in sorted(self._bindings.items()))
        return f"Environment({{{inner}}})"

    def bind(self, name: str, value: Value) -> "Environment":
        return bind(self, name, value)

    def bind_many(self, pairs: Mapping[str, Value]) -> "Environment":
        if not pairs:
            return self
        new = dict(self._bindings)
        new.update(pairs)
        return Environment(new)


def bind(env: Environment, name: str, v: Value) -> Environment:
    """Persistent update: returns a new environment, ``env`` is untouched."""
    new = dict(env._bindings)
    new[name] = v
    return Environment(new)


# ---------------------------------------------------------------- evaluation

def _check_int(v: int, op: str) -> int:
    if v < INT_MIN or v > INT_MAX:
        raise EvalError("overflow", f"{op} result {v} exceeds 64-bit range")
    return v


def _arith(op: str, a: Value, b: Value) -> Value:
    sa, sb = sort_of(a), sort_of(b)
    if sa != sb or sa not in ("int", "float"):
        raise EvalError("sort-mismatch", f"{op} got ({sa}, {sb})")
    if op == "+":
        r = a + b
    elif op == "-":
        r = a - b
    elif op == "*":
        r = a * b
    else:
        if b == 0:
            raise EvalError("division-by-zero", f"{render_value(a)} / {render_value(b)}")
        if sa == "float":
            return a / b
        q = abs(a) // abs(b)
        r = q if (a < 0) == (b < 0) else -q
    return _check_int(r, op) if sa == "int" else r


def _compare(op: str, a: Value, b: Value) -> bool:
    sa, sb = sort_of(a), sort_of(b)
    if sa != sb:
        raise EvalError("sort-mismatch", f"{op} got ({sa}, {sb})")
    if op == "=":
        return same_value(a, b)
    if op == "!=":
        return not same_value(a, b)
    if sa not in ("int", "float", "string"):
        raise EvalError("sort-mismatch", f"{op} got ({sa}, {sb})")
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def eval_value(expr: CondExpr, env: Mapping[str, Value], scope: str | None = None) -> Value:
    """Strict bottom-up evaluation; raises :class:`EvalError`."""
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Var):
        name = qualify(expr.name, scope)
        try:
            return env[name]
        except KeyError:
            raise EvalError("unbound-variable", name) from None
    if isinstance(expr, Arith):
        return _arith(expr.op, eval_value(expr.left, env, scope),
                      eval_value(expr.right, env, scope))
    if isinstance(expr, Cmp):
        return _compare(expr.op, eval_value(expr.left, env, scope),
                        eval_value(expr.right, env, scope))
    if isinstance(expr, BoolOp):
        vals = []
        for a in expr.args:
            v = eval_value(a, env, scope)
            if sort_of(v) != "bool":
                raise EvalError("sort-mismatch", f"{expr.op} got {sort_of(v)}")
            vals.append(v)
        if expr.op == "not":
            return not vals[0]
        return all(vals) if expr.op == "and" else any(vals)
    if isinstance(expr, Len):
        v = eval_value(expr.arg, env, scope)
        if sort_of(v) not in ("list", "string"):
            raise EvalError("sort-mismatch", f"len got {sort_of(v)}")
        return len(v)
    raise TypeError(f"not a condition: {expr!r}")


def eval_cond(expr: CondExpr, env: Mapping[str, Value], scope: str | None = None) -> bool:
    v = eval_value(expr, env, scope)
    if sort_of(v) != "bool":
        raise EvalError("not-a-boolean", f"{render_expr(expr)} evaluated to {sort_of(v)}")
    return v
