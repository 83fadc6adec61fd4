import math

import mpmath
import numpy as np
import pytest
from scipy import integrate, special, stats

from ldpc_bounds.channels import (
    ChannelModel, LlrDistribution, Quadrature, capacity, capacity_gap_with_error,
    capacity_with_error, ebno_db_to_sigma, gaussian_expectation, h2, hard_decision_w,
    llr_distribution, moment_m, sigma_to_ebno_db,
)


def awgn_capacity_oracle(sigma):
    # direct integral over the channel output y, independent of the LLR route
    def f(y):
        p0 = stats.norm.pdf(y, 1.0, sigma)
        p1 = stats.norm.pdf(y, -1.0, sigma)
        return p0 * np.log2(2.0 * p0 / (p0 + p1)) if p0 > 0 else 0.0
    val, _ = integrate.quad(f, -1 - 40 * sigma, 1 + 40 * sigma, limit=400, epsabs=1e-14, epsrel=1e-13)
    return val


def tanh_moment_oracle(sigma, p):
    # E[tanh^{2p}(L/2)] as an integral over y with L = 2y/sigma^2
    def f(y):
        return stats.norm.pdf(y, 1.0, sigma) * math.tanh(y / sigma ** 2) ** (2 * p)
    val, _ = integrate.quad(f, 1 - 40 * sigma, 1 + 40 * sigma, limit=400, epsabs=1e-14, epsrel=1e-13)
    return val


def test_binary_entropy_values():
    assert h2(0.5) == 1.0
    assert h2(0.0) == 0.0 and h2(1.0) == 0.0
    mpmath.mp.dps = 40
    x = mpmath.mpf("0.11")
    exact = -(x * mpmath.log(x, 2) + (1 - x) * mpmath.log(1 - x, 2))
    assert abs(h2(0.11) - float(exact)) < 1e-15
    assert abs(h2(0.3) - h2(0.7)) < 1e-15


def test_binary_entropy_rejects_outside_unit_interval():
    with pytest.raises(ValueError):
        h2(1.2)
    with pytest.raises(ValueError):
        h2(-0.01)


@pytest.mark.parametrize("kind,param", [("bec", 1.0), ("bsc", 0.5), ("bsc", -0.1), ("biawgn", 0.0),
                                        ("biawgn", float("nan")), ("awgn", 1.0)])
def test_channel_parameter_validation(kind, param):
    with pytest.raises(ValueError):
        ChannelModel(kind, param)


def test_bec_and_bsc_capacity():
    assert capacity(ChannelModel.bec(0.5)) == 0.5
    assert capacity(ChannelModel.bec(0.0)) == 1.0
    assert abs(capacity(ChannelModel.bsc(0.11)) - (1 - h2(0.11))) < 1e-15
    assert capacity(ChannelModel.bsc(0.0)) == 1.0


@pytest.mark.parametrize("sigma", [0.4, 0.7, 0.9787, 1.2, 2.0])
def test_awgn_capacity_matches_output_integral(sigma):
    assert abs(capacity(ChannelModel.biawgn(sigma)) - awgn_capacity_oracle(sigma)) < 1e-10


def test_awgn_capacity_gap_keeps_relative_accuracy():
    # at sigma = 0.25 the gap 1 - C is ~1e-4; compare relative, not absolute
    sigma = 0.25
    oracle = 1.0 - awgn_capacity_oracle(sigma)
    gap = capacity_gap_with_error(ChannelModel.biawgn(sigma)).value
    assert abs(gap - oracle) / oracle < 1e-7


@pytest.mark.parametrize("sigma", [0.3, 0.8, 1.5])
def test_hard_decision_w_is_q_function(sigma):
    assert abs(hard_decision_w(ChannelModel.biawgn(sigma)) - stats.norm.sf(1.0 / sigma)) < 1e-15


def test_hard_decision_w_discrete():
    assert hard_decision_w(ChannelModel.bsc(0.07)) == pytest.approx(0.07, abs=1e-16)
    assert hard_decision_w(ChannelModel.bec(0.4)) == pytest.approx(0.2, abs=1e-16)


def test_llr_law_of_awgn():
    dist = llr_distribution(ChannelModel.biawgn(0.8))
    mean, var = dist.gaussian
    assert mean == pytest.approx(2 / 0.64)
    assert var == pytest.approx(2 * mean)
    assert dist.total_mass == 1.0


def test_llr_atoms_discrete():
    d = llr_distribution(ChannelModel.bec(0.3))
    assert d.infinite_mass == pytest.approx(0.7)
    assert d.point_mass(0.0) == pytest.approx(0.3)
    d = llr_distribution(ChannelModel.bsc(0.1))
    L = math.log(9.0)
    assert d.point_mass(L) == pytest.approx(0.9) and d.point_mass(-L) == pytest.approx(0.1)


@pytest.mark.parametrize("sigma,p", [(0.9, 1), (0.9, 5), (0.5, 3), (1.4, 2), (0.97, 40)])
def test_awgn_tanh_moments_match_integral(sigma, p):
    dist = llr_distribution(ChannelModel.biawgn(sigma))
    assert abs(moment_m(dist, p) - tanh_moment_oracle(sigma, p)) < 1e-11


def test_tanh_moment_complements_are_accurate():
    dist = llr_distribution(ChannelModel.biawgn(0.3))
    direct, comp, _ = dist.tanh_power_moments(np.array([1.0, 7.0, 50.0]))
    oracle = [1 - tanh_moment_oracle(0.3, p) for p in (1, 7, 50)]
    assert np.allclose(direct + comp, 1.0, atol=1e-13)
    # the oracle itself loses digits in 1 - M; only a loose check is possible
    assert np.allclose(comp, oracle, rtol=1e-5)
    # M_2p decreases in p
    assert direct[0] > direct[1] > direct[2]


def test_discrete_tanh_moments_closed_form():
    w = 0.05
    d = llr_distribution(ChannelModel.bsc(w))
    for p in (1, 2, 9):
        assert moment_m(d, p) == pytest.approx((1 - 2 * w) ** (2 * p), rel=1e-13)
    d = llr_distribution(ChannelModel.bec(0.35))
    for p in (1, 4, 100):
        assert moment_m(d, p) == pytest.approx(0.65, abs=1e-15)


def test_symmetric_half_line_form_of_moment():
    # M_2p also equals the integral over l > 0 of a(l)(1 + e^-l) tanh^{2p}(l/2)
    sigma = 0.9
    dist = llr_distribution(ChannelModel.biawgn(sigma))
    for p in (1, 3):
        half, _ = integrate.quad(lambda l: dist.pdf(l) * (1 + math.exp(-l)) * math.tanh(l / 2) ** (2 * p),
                                 0, 200, limit=400, epsabs=1e-14)
        assert abs(half - moment_m(dist, p)) < 1e-10


def test_moment_order_must_be_positive():
    with pytest.raises(ValueError):
        moment_m(llr_distribution(ChannelModel.bec(0.1)), 0)


def test_ebno_conversion_roundtrip():
    s = ebno_db_to_sigma(0.187, 0.5)
    assert sigma_to_ebno_db(s, 0.5) == pytest.approx(0.187, abs=1e-12)
    # Eb/N0 = 1 / (2 R sigma^2)
    assert 10 ** (0.187 / 10) == pytest.approx(1 / (2 * 0.5 * s * s))


def test_gaussian_expectation_falls_back_to_panels():
    # a sharp feature far from the mean defeats Gauss-Hermite; the panel rule copes
    res = gaussian_expectation(lambda x, w: w @ special.expit(4.0 * (x - 25.0)), 0.0, 25.0)
    exact, _ = integrate.quad(lambda x: stats.norm.pdf(x, 0, 5) * special.expit(4.0 * (x - 25.0)),
                              10, 60, points=[25.0], epsabs=1e-16, epsrel=1e-12)
    assert abs(res.value - exact) < 1e-12


def test_quadrature_doubling_leaves_capacity_unchanged():
    ch = ChannelModel.biawgn(0.88)
    a = capacity_with_error(ch).value
    b = capacity_with_error(ch, Quadrature().doubled()).value
    assert abs(a - b) < 1e-12


def test_output_pdf_only_for_awgn():
    ch = ChannelModel.biawgn(1.0)
    assert ch.output_pdf(1.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    with pytest.raises(ValueError):
        ChannelModel.bsc(0.1).output_pdf(0.0)


def test_interval_mass_closedness():
    d = LlrDistribution(atoms=((1.0, 0.5), (-1.0, 0.5)))
    assert d.interval_mass(-1.0, 1.0) == 0.5
    assert d.interval_mass(-1.0, 1.0, lo_closed=True) == 1.0
    assert d.interval_mass(-1.0, 1.0, lo_closed=True, hi_closed=False) == 0.5
