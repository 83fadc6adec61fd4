import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ldpc_bounds import kernels
from ldpc_bounds.kernels import (
    EXACT_COEFFICIENT_MAX_K, CompositionOverflowError, composition_count, composition_expectation,
    compositions, log_power_sums, multinomial_log_coefficients,
)


def test_composition_count_and_content():
    comps = compositions(5, 3)
    assert comps.shape == (composition_count(5, 3), 3) == (21, 3)
    assert np.all(comps.sum(axis=1) == 5)
    assert len({tuple(r) for r in comps}) == 21
    assert not comps.flags.writeable


def test_compositions_are_in_colex_order():
    comps = [tuple(r) for r in compositions(4, 3)]
    assert comps == sorted(comps, key=lambda r: r[::-1])
    assert comps[0] == (4, 0, 0) and comps[-1] == (0, 0, 4)


def test_multinomial_coefficients_exact_range():
    coef = np.exp(multinomial_log_coefficients(6, 4))
    # they sum to 4^6
    assert math.isclose(coef.sum(), 4 ** 6, rel_tol=1e-13)


def test_log_gamma_branch_agrees_with_exact_integers():
    k = EXACT_COEFFICIENT_MAX_K + 2
    logs = multinomial_log_coefficients(k, 2)
    exact = [math.log(math.comb(k, int(c))) for c in compositions(k, 2)[:, 0]]
    assert np.allclose(logs, exact, rtol=0, atol=1e-10)


def test_overflow_guard_reports_size():
    with pytest.raises(CompositionOverflowError) as info:
        compositions(200, 8)
    assert info.value.k == 200 and info.value.parts == 8
    assert info.value.count > kernels.MAX_COMPOSITION_TERMS


def test_composition_expectation_single_pair_is_h2():
    # all mass in one pair: h2((1 - t^k) / 2)
    t = 0.8
    val = composition_expectation(6, np.array([1.0, 0.0]), np.array([t, 0.3]))
    x = (1 - t ** 6) / 2
    assert math.isclose(val, -(x * math.log2(x) + (1 - x) * math.log2(1 - x)), rel_tol=1e-14)


def test_zero_mass_pairs_drop_out():
    a = composition_expectation(5, np.array([0.7, 0.3]), np.array([0.9, 0.2]))
    b = composition_expectation(5, np.array([0.7, 0.3, 0.0]), np.array([0.9, 0.2, 0.5]))
    assert math.isclose(a, b, rel_tol=1e-14)


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 14), n=st.integers(1, 4), seed=st.integers(0, 2 ** 31))
def test_numba_and_numpy_composition_kernels_agree(k, n, seed):
    rng = np.random.default_rng(seed)
    q = rng.dirichlet(np.ones(n))
    q[rng.random(n) < 0.2] = 0.0
    t = rng.random(n)
    comps = compositions(k, n)
    logc = multinomial_log_coefficients(k, n)
    a = kernels._composition_expectation_loop(comps, logc, q, t)
    b = kernels._composition_expectation_numpy(comps, logc, q, t)
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-15)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 31))
def test_numba_and_numpy_power_sums_agree(seed):
    rng = np.random.default_rng(seed)
    base = rng.random(50)
    base[0] = 0.0
    base[1] = 1.0
    logb = np.log(base, where=base > 0, out=np.full(50, -np.inf))
    w = rng.random(50)
    e = np.sort(rng.uniform(1, 1e4, 30))
    d1, c1 = kernels._log_power_sums_loop(logb, w, e)
    d2, c2 = kernels._log_power_sums_numpy(logb, w, e)
    assert np.allclose(d1, d2, rtol=1e-12, atol=1e-300)
    assert np.allclose(c1, c2, rtol=1e-12, atol=0)


def test_power_sum_complement_keeps_precision():
    # b = 1 - 1e-15: 1 - b^3 is 3e-15, which 1 - (b^3) would mostly lose
    logb = np.array([math.log1p(-1e-15)])
    d, c = log_power_sums(logb, np.array([1.0]), np.array([3.0]))
    assert math.isclose(c[0], -math.expm1(3 * math.log1p(-1e-15)), rel_tol=1e-14)
    assert math.isclose(d[0] + c[0], 1.0, rel_tol=1e-15)
