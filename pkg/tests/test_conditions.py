import pytest
from hypothesis import given, strategies as st

from samcheck.conditions import (Arith, BoolOp, Cmp, Environment, Len, Lit, Var, bind,
                                 eval_cond, eval_value, free_vars, render_expr, same_value)
from samcheck.errors import EvalError
from samcheck.parser import parse_condition


def test_scoped_var_resolution():
    env = Environment({"Top.x": 3})
    assert eval_value(parse_condition("(* x 2)"), env, "Top") == 6


def test_unbound_variable_is_error():
    with pytest.raises(EvalError) as exc:
        eval_value(parse_condition("(+ x y)"), Environment({"Top.x": 3}), "Top")
    assert exc.value.kind == "unbound-variable"
    assert exc.value.detail == "Top.y"


def test_division_by_zero():
    with pytest.raises(EvalError) as exc:
        eval_value(parse_condition("(/ x 0)"), Environment({"Top.x": 3}), "Top")
    assert exc.value.kind == "division-by-zero"


@pytest.mark.parametrize("y, expected", [(6, True), (7, False)])
def test_eval_cond_postcondition(y, expected):
    env = Environment({"Top.x": 3, "Top.y": y})
    assert eval_cond(parse_condition("(= y (* x 2))"), env, "Top") is expected


def test_non_boolean_root():
    with pytest.raises(EvalError) as exc:
        eval_cond(parse_condition("(* x 2)"), Environment({"Top.x": 3}), "Top")
    assert exc.value.kind == "not-a-boolean"


def test_bind_is_persistent():
    empty = Environment()
    one = bind(empty, "Top.x", 3)
    assert dict(one) == {"Top.x": 3} and len(empty) == 0
    assert dict(bind(one, "Top.x", 5)) == {"Top.x": 5}
    assert dict(bind(one, "Top.y", 1)) == {"Top.x": 3, "Top.y": 1}
    assert dict(one) == {"Top.x": 3}


@pytest.mark.parametrize("text", ["(+ x 1.0)", "(< b 1)", "(and x true)", "(= b 1)", "(< b b)"])
def test_sort_mismatch(text):
    env = Environment({"C.x": 1, "C.b": True})
    with pytest.raises(EvalError) as exc:
        eval_value(parse_condition(text), env, "C")
    assert exc.value.kind == "sort-mismatch"


@pytest.mark.parametrize("text, value", [
    ("(/ 7 2)", 3), ("(/ -7 2)", -3), ("(/ 7 -2)", -3), ("(/ 7.0 2.0)", 3.5),
    ("(- 2 5)", -3), ("(len (list 1 2 3))", 3), ("(len \"abc\")", 3),
    ("(or false false true)", True), ("(not true)", False),
    ("(= (list 1 2) (list 1 2))", True), ("(!= \"a\" \"b\")", True),
    ("(< \"a\" \"b\")", True), ("(>= 2.5 2.5)", True),
])
def test_literal_arithmetic(text, value):
    assert same_value(eval_value(parse_condition(text), Environment()), value)


def test_int_overflow():
    with pytest.raises(EvalError) as exc:
        eval_value(parse_condition("(* 9223372036854775807 2)"), Environment())
    assert exc.value.kind == "overflow"


def test_ints_and_bools_never_compare_equal():
    assert not same_value(1, True)
    assert not same_value(1, 1.0)
    assert Environment({"a": 1}) != Environment({"a": True})


def test_free_vars_scoped_and_sorted():
    expr = parse_condition("(and (= y (* x 2)) (> Other.z 0))")
    assert free_vars(expr, "Top") == ["Other.z", "Top.x", "Top.y"]


int64 = st.integers(-(2 ** 20), 2 ** 20)


@given(st.dictionaries(st.sampled_from(["C.a", "C.b", "C.c"]), int64), st.sampled_from(
    ["(= a (+ b c))", "(< (* a 2) (- b c))", "(and (> a 0) (or (= b c) (not (= c 0))))"]))
def test_evaluation_is_pure_and_deterministic(bindings, text):
    env = Environment(bindings)
    snapshot = dict(env)
    expr = parse_condition(text)

    def run():
        try:
            return ("ok", eval_value(expr, env, "C"))
        except EvalError as exc:
            return ("err", exc.kind)

    assert run() == run()
    assert dict(env) == snapshot


def test_render_expr_shapes():
    expr = BoolOp("and", (Cmp("=", Var("y"), Arith("*", Var("x"), Lit(2))),
                          Cmp(">", Len(Var("s")), Lit(0))))
    assert render_expr(expr) == "(and (= y (* x 2)) (> (len s) 0))"
