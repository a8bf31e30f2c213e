import numpy as np
import pytest
from hypothesis import given, strategies as st

from survcontour.stepfun import StepFunction


def test_right_continuous_evaluation():
    f = StepFunction(np.array([1.0, 2.0, 4.0]), np.array([0.8, 0.5, 0.1]))
    assert f(0.0) == 1.0
    assert f(1.0) == 0.8
    assert f(1.5) == 0.8
    assert f(2.0) == 0.5
    assert f(4.0) == 0.1
    assert f(100.0) == 0.1


def test_left_limit():
    f = StepFunction(np.array([1.0, 2.0]), np.array([0.5, 0.25]))
    assert f.left_limit(1.0) == 1.0
    assert f.left_limit(1.5) == 0.5
    assert f.left_limit(2.0) == 0.5
    assert f.left_limit(3.0) == 0.25


def test_vector_evaluation_matches_scalar():
    f = StepFunction(np.array([1.0, 3.0]), np.array([0.7, 0.2]))
    ts = np.array([0.0, 1.0, 2.0, 3.0, 5.0])
    assert np.array_equal(f(ts), np.array([f(t) for t in ts]))


def test_rejects_unsorted_knots():
    with pytest.raises(ValueError):
        StepFunction(np.array([2.0, 1.0]), np.array([0.5, 0.4]))
    with pytest.raises(ValueError):
        StepFunction(np.array([1.0, 1.0]), np.array([0.5, 0.4]))


def test_empty_function_is_constant():
    f = StepFunction(np.empty(0), np.empty(0), initial_value=1.0)
    assert f(123.0) == 1.0
    assert f.last_knot == 0.0


@given(
    st.lists(
        st.floats(min_value=0.0, max_value=100.0, allow_nan=False),
        min_size=1,
        max_size=20,
        unique=True,
    ),
    st.integers(min_value=0, max_value=10**6),
)
def test_evaluation_matches_naive_scan(knots, seed):
    knots = np.sort(np.asarray(knots))
    rng = np.random.default_rng(seed)
    values = rng.uniform(size=knots.size)
    f = StepFunction(knots, values, initial_value=1.0)
    for t in rng.uniform(-5, 110, size=10):
        expected = 1.0
        for k, v in zip(knots, values):
            if k <= t:
                expected = v
        assert f(t) == expected
