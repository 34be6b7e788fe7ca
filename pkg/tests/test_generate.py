from hypothesis import given, settings, strategies as st

from samcheck.generate import gen_inputs, gen_spec
from samcheck.model import validate_spec
from samcheck.parser import render_spec
from samcheck.predictor import predict_trace
from samcheck.traceio import dumps_trace


def test_seed_one_is_repeatable():
    assert render_spec(gen_spec(1)) == render_spec(gen_spec(1))
    assert gen_inputs(gen_spec(1), 1) == gen_inputs(gen_spec(1), 1)


def test_depth_one_is_single_component():
    for seed in range(20):
        assert len(gen_spec(seed, max_depth=1).components) == 1


def test_hundred_seeds_validate():
    assert all(validate_spec(gen_spec(s)) == [] for s in range(100))


def test_shapes_vary():
    sizes = {len(gen_spec(s).components) for s in range(100)}
    assert min(sizes) == 1 and max(sizes) > 4


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 3))
def test_bounds_and_determinism(seed, depth, children):
    spec = gen_spec(seed, depth, children)
    for c in spec.components.values():
        assert len(c.children) <= children

    def height(name):
        kids = spec.components[name].children
        return 1 + max((height(k) for k in kids), default=0)

    assert height(spec.top) <= depth
    inputs = gen_inputs(spec, seed)
    a = dumps_trace(predict_trace(spec, inputs, seed))
    b = dumps_trace(predict_trace(gen_spec(seed, depth, children), gen_inputs(spec, seed), seed))
    assert a == b
