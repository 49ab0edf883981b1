import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from simshap.online import WelfordAccumulator


def feed(samples):
    acc = WelfordAccumulator(np.asarray(samples).shape[1])
    for s in samples:
        acc.update(s)
    return acc


def test_constant_samples():
    acc = feed([[1.0], [1.0], [1.0]])
    assert acc.mean.tolist() == [1.0]
    assert acc.variance.tolist() == [0.0]


def test_two_samples():
    acc = feed([[0.0], [2.0]])
    assert acc.mean[0] == 1.0
    assert acc.variance[0] == 2.0  # sum (x - mean)^2 / (n - 1)


def test_variance_needs_two():
    acc = feed([[3.0, 4.0]])
    with pytest.raises(ValueError):
        acc.variance


def test_rejects_bad_samples():
    acc = WelfordAccumulator(2)
    with pytest.raises(ValueError):
        acc.update([1.0, np.nan])
    with pytest.raises(ValueError):
        acc.update([1.0])


def test_long_stream_matches_two_pass():
    rng = np.random.default_rng(0)
    X = rng.normal(loc=50.0, scale=3.0, size=(10_000, 5))
    acc = feed(X)
    np.testing.assert_allclose(acc.mean, X.mean(axis=0), rtol=1e-12)
    np.testing.assert_allclose(acc.variance, X.var(axis=0, ddof=1), rtol=1e-9)
    assert np.all(acc.m2 >= 0)


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 40), st.integers(1, 4)), elements=finite),
       st.randoms(use_true_random=False))
def test_permutation_invariance(X, rnd):
    a = feed(X)
    order = list(range(X.shape[0]))
    rnd.shuffle(order)
    b = feed(X[order])
    two_pass = X.var(axis=0, ddof=1)
    scale = np.maximum(two_pass, 1e-6 * (np.abs(X).max() + 1) ** 2)
    assert np.all(np.abs(a.variance - b.variance) <= 1e-9 * scale)
    assert np.all(np.abs(a.variance - two_pass) <= 1e-9 * scale)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 40), st.integers(1, 4)), elements=finite),
       st.data())
def test_merge_equals_sequential(X, data):
    cut = data.draw(st.integers(0, X.shape[0]))
    left = feed(X[:cut]) if cut else WelfordAccumulator(X.shape[1])
    right = feed(X[cut:]) if cut < X.shape[0] else WelfordAccumulator(X.shape[1])
    merged = left.merge(right)
    seq = feed(X)
    assert merged.count == seq.count
    scale = np.maximum(seq.variance, 1e-6 * (np.abs(X).max() + 1) ** 2)
    assert np.all(np.abs(merged.variance - seq.variance) <= 1e-9 * scale)
