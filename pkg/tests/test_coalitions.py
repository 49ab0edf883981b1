from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from simshap.coalitions import (
    ENUMERATION_CAP,
    EnumerationCapError,
    EstimatorConfig,
    GameBoundary,
    all_coalitions,
    coalition_from_index,
    coalition_to_index,
    kernel_enumeration,
    shapley_kernel_weight,
)


@pytest.mark.parametrize("d,k,expected", [
    (3, 1, Fraction(1, 3)),
    (3, 2, Fraction(1, 3)),
    (4, 2, Fraction(1, 8)),
])
def test_kernel_weight_examples(d, k, expected):
    # direct rational evaluation of (d-1) / (C(d,k) k (d-k))
    assert Fraction(d - 1, comb(d, k) * k * (d - k)) == expected
    assert shapley_kernel_weight(d, k) == pytest.approx(float(expected), rel=1e-14)


@pytest.mark.parametrize("k", [0, 5])
def test_kernel_weight_diverges_at_ends(k):
    with pytest.raises(ValueError):
        shapley_kernel_weight(5, k)


@given(st.integers(2, 300).flatmap(lambda d: st.tuples(st.just(d), st.integers(1, d - 1))))
def test_kernel_symmetry_and_size_mass(dk):
    d, k = dk
    w = shapley_kernel_weight(d, k)
    assert w == pytest.approx(shapley_kernel_weight(d, d - k), rel=1e-12)
    assert comb(d, k) * w == pytest.approx((d - 1) / (k * (d - k)), rel=1e-10)


def test_kernel_weight_large_d_no_overflow():
    # C(100, 50) ~ 1e29 and C(1000, 3) are beyond exact float ratios of naive code paths
    w = shapley_kernel_weight(100, 50)
    assert w == pytest.approx(99 / (comb(100, 50) * 50 * 50), rel=1e-10)
    assert np.isfinite(shapley_kernel_weight(2000, 1))


@pytest.mark.parametrize("index,expected", [(0, [0, 0, 0]), (7, [1, 1, 1]), (5, [1, 0, 1])])
def test_coalition_from_index(index, expected):
    assert coalition_from_index(index, 3).tolist() == expected


@given(st.integers(1, 12).flatmap(lambda d: st.tuples(st.just(d), st.integers(0, 2**d - 1))))
def test_index_round_trip(di):
    d, i = di
    assert coalition_to_index(coalition_from_index(i, d)) == i


def test_enumeration_cap():
    with pytest.raises(EnumerationCapError):
        coalition_from_index(0, ENUMERATION_CAP + 1)
    with pytest.raises(EnumerationCapError):
        all_coalitions(ENUMERATION_CAP + 1)
    with pytest.raises(ValueError):
        coalition_from_index(8, 3)


def test_all_coalitions_rows_match_index():
    Z = all_coalitions(4)
    for i in range(16):
        assert coalition_to_index(Z[i]) == i


def test_kernel_enumeration_is_normalized():
    Z, p = kernel_enumeration(5)
    assert Z.shape == (30, 5)
    assert p.sum() == pytest.approx(1.0, abs=1e-14)
    sizes = Z.sum(axis=1)
    assert np.all((sizes > 0) & (sizes < 5))


def test_boundary_c():
    assert GameBoundary(0.0, 9.0).c == 9.0
    assert GameBoundary(-1.5, 2.0).c == 3.5


@pytest.mark.parametrize("bad", [
    {"t": 0.0}, {"t": 1.0}, {"lam": -1e-3}, {"xi": 0.0}, {"xi": 1.0},
    {"epsilon": 0.0}, {"m": 0}, {"max_iter": 0}, {"seed": -1}, {"seed": 2**64},
])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        EstimatorConfig(**bad)


def test_config_defaults():
    cfg = EstimatorConfig()
    assert (cfg.t, cfg.lam, cfg.epsilon, cfg.xi, cfg.max_iter) == (0.5, 0.01, 0.025, 0.3, 10000)
    assert cfg.batch_m(12) == 120
    assert cfg.replace(m=7).batch_m(12) == 7
