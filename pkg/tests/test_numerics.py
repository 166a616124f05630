import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from psopt.numerics import (DomainError, ShapeMismatchError, as_vec, ew_inv,
                            ew_max, ew_mul, inner, make_rng, max_elem, norm2)

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def vec(n=st.integers(1, 100)):
    return n.flatmap(lambda k: arrays(np.float64, k, elements=finite_floats))


def test_ew_mul_examples():
    assert np.array_equal(ew_mul(np.array([1.0, 2.0]), np.array([1.0, 2.0])),
                          np.array([1.0, 4.0]))
    assert np.array_equal(ew_mul(np.array([1.0, 2.0]), np.array([1.0, 0.5])),
                          np.array([1.0, 1.0]))


def test_ew_mul_identity():
    rng = make_rng(0)
    x = rng.standard_normal(17)
    assert np.array_equal(ew_mul(x, np.ones(17)), x)


def test_ew_mul_length_mismatch():
    with pytest.raises(ShapeMismatchError):
        ew_mul(np.ones(2), np.ones(3))


def test_ew_inv_examples():
    assert np.array_equal(ew_inv(np.array([1.0, 2.0])), np.array([1.0, 0.5]))
    assert np.array_equal(ew_inv(np.array([4.0])), np.array([0.25]))


def test_ew_inv_rejects_nonpositive():
    with pytest.raises(DomainError):
        ew_inv(np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        ew_inv(np.array([-2.0]))


def test_ew_inv_involution():
    rng = make_rng(1)
    x = np.exp(rng.uniform(-3, 3, 50))
    assert np.allclose(ew_inv(ew_inv(x)), x, rtol=1e-15)


def test_ew_max_and_max_elem():
    assert np.array_equal(ew_max(np.array([1.0, 5.0]), np.array([3.0, 2.0])),
                          np.array([3.0, 5.0]))
    assert max_elem(np.array([1.0, 5.0])) == 5.0
    x = make_rng(2).standard_normal(9)
    assert np.array_equal(ew_max(x, x), x)


def test_norm_and_inner_examples():
    assert norm2(np.array([3.0, 4.0])) == 5.0
    assert inner(np.array([1.0, 2.0]), np.array([2.0, 1.0])) == 4.0
    assert norm2(np.zeros(6)) == 0.0


@given(vec())
@settings(max_examples=50)
def test_inner_matches_norm_squared(x):
    assert inner(x, x) == pytest.approx(norm2(x) ** 2, rel=1e-12, abs=1e-300)


@given(vec())
@settings(max_examples=50)
def test_elementwise_ops_preserve_length_and_finiteness(x):
    y = ew_mul(x, x)
    assert y.shape == x.shape and np.all(np.isfinite(y))
    assert ew_max(x, -x).shape == x.shape


def test_as_vec_rejects_nonfinite():
    with pytest.raises(DomainError):
        as_vec([1.0, np.nan])
    with pytest.raises(DomainError):
        as_vec([np.inf])


def test_rng_streams_reproducible():
    a = make_rng(1234).standard_normal(1_000_000)
    b = make_rng(1234).standard_normal(1_000_000)
    assert np.array_equal(a, b)


def test_rng_different_seeds_differ():
    assert not np.array_equal(make_rng(1).standard_normal(10),
                              make_rng(2).standard_normal(10))
