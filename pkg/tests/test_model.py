import pytest
from hypothesis import given, settings, strategies as st

from samcheck.errors import UnknownComponent
from samcheck.generate import gen_spec
from samcheck.model import (ComponentDef, DataLink, EventRegistration, Port, SamSpec,
                            is_top, pattern_matches, patterns_overlap, subtree,
                            validate_spec)
from samcheck.parser import parse_spec

from conftest import golden_names, load_golden


def kinds(report):
    return [d.kind for d in report]


def test_minimal_spec_is_clean():
    spec = SamSpec("Top", {"Top": ComponentDef(
        "Top", inputs=(Port("x", "input", "int"),), entry_events=frozenset({"Top.main"}))},
        (EventRegistration("Top.main", "Top", "entry", (("x", ("Top", "x")),)),))
    assert validate_spec(spec) == []


@pytest.mark.parametrize("name", golden_names())
def test_golden_corpus_validates(name):
    assert validate_spec(load_golden(name)) == []


def test_unknown_port_in_data_link(doubler):
    top = doubler.components["Top"]
    broken = SamSpec(doubler.top, {**doubler.components, "Top": ComponentDef(
        **{**top.__dict__, "data_links": (DataLink(("Top", "x"), ("Doubler", "in2")),)})},
        doubler.registrations)
    report = validate_spec(broken)
    assert kinds(report) == ["unknown-port"]
    assert "Doubler.in2" in report[0].message


def test_child_of_two_parents():
    spec = parse_spec("""(sam (top T)
      (component T (children A B))
      (component A (children C))
      (component B (children C))
      (component C))""")
    assert "not-a-tree" in kinds(validate_spec(spec))


@pytest.mark.parametrize("text, kind", [
    ("(sam (top Ghost) (component T))", "unknown-component"),
    ("(sam (top T) (component T (children T)))", "not-a-tree"),
    ("(sam (top T) (component T) (component Lost))", "not-a-tree"),
    ("(sam (top T) (component T (inputs (x int) (x int))))", "duplicate-port"),
    ('(sam (top T) (component T (entry ("a")) (exit ("a"))))', "role-overlap"),
    ('(sam (top T) (component T (entry ("a*")) (allowable ("ab"))))', "role-overlap"),
    ("(sam (top T) (component T (inputs (x int)) (outputs (y int)) (dataflow (T.y -> T.x))))",
     "bad-link"),
    ('(sam (top T) (component T (inputs (x int)) (exit ("e"))) (register "e" T exit ((x -> T.x))))',
     "bad-binding"),
    ('(sam (top T) (component T (allowable ("l"))) (register "l" T allowable ((k -> T.x))))',
     "bad-binding"),
    ('(sam (top T) (component T (entry ("a"))) (register "b" T entry))', "role-mismatch"),
    ('(sam (top T) (component T (entry ("a" "a*"))) (register "a" T entry) (register "a*" T entry))',
     "duplicate-registration"),
    ('(sam (top T) (component T) (register "a" Ghost entry))', "unknown-component"),
    ("(sam (top T) (component T (pre (> q 0))))", "unknown-port"),
    ("(sam (top T) (component T (children A)) (component A) (split T (true (T -> A))))",
     "unknown-control-link"),
    ("(sam (top T) (component T (controlflow (T -> Z))))", "unknown-component"),
    ("(sam (top T) (component T (children A) (controlflow (T -> A) (T -> A))) (component A))",
     "duplicate-control-link"),
])
def test_violations(text, kind):
    assert kind in kinds(validate_spec(parse_spec(text)))


def test_report_is_sorted_and_deterministic():
    text = """(sam (top T) (component T (children A B) (inputs (x int) (x int))
        (dataflow (A.q -> B.r))) (component A) (component B (inputs (x int) (x int))))"""
    a = validate_spec(parse_spec(text))
    b = validate_spec(parse_spec(text))
    assert a == b == sorted(a)
    assert len(a) >= 3


def test_is_top(doubler):
    assert is_top(doubler, "Top")
    assert not is_top(doubler, "Doubler")
    with pytest.raises(UnknownComponent):
        is_top(doubler, "Ghost")


def test_subtree(doubler):
    assert subtree(doubler, "Top") == ["Top", "Doubler"]
    assert subtree(doubler, "Doubler") == ["Doubler"]
    with pytest.raises(UnknownComponent):
        subtree(doubler, "Ghost")


def test_subtree_three_levels():
    # hand-drawn: Top -> A -> B, plus Top -> C after A
    spec = parse_spec("(sam (top Top) (component Top (children A C)) (component A (children B))"
                      " (component B) (component C))")
    assert subtree(spec, "Top") == ["Top", "A", "B", "C"]
    assert subtree(spec, "A") == ["A", "B"]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_subtree_visits_every_component_once(seed):
    spec = gen_spec(seed)
    assert validate_spec(spec) == []
    walk = subtree(spec, spec.top)
    assert sorted(walk) == sorted(spec.components)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.text(alphabet="Cabrun.!0123456789*", max_size=8))
def test_role_sets_disjoint(seed, method):
    spec = gen_spec(seed)
    for c in spec.components.values():
        roles = [r for r in ("entry", "exit", "allowable")
                 if any(pattern_matches(p, method) for p in c.events(r))]
        assert len(roles) <= 1


@pytest.mark.parametrize("a, b, overlap", [
    ("x", "x", True), ("x", "y", False), ("x*", "xy", True), ("xy", "x*", True),
    ("x*", "y", False), ("ab*", "a*", True), ("ab*", "ac*", False),
])
def test_pattern_overlap(a, b, overlap):
    assert patterns_overlap(a, b) is overlap
