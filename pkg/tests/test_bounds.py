import math

import numpy as np
import pytest

from ldpc_bounds.bounds import (
    TWO_LEVEL, UNQUANTIZED, SeriesConfig, binary_entropy, density_bound, density_lb_quantized,
    density_lb_two_level, density_lb_unquantized, entropy_lb_quantized, entropy_lb_unquantized,
    parse_method, rate_bound, rate_ub_quantized, rate_ub_two_level, rate_ub_unquantized,
    tanh_series,
)
from ldpc_bounds.channels import ChannelModel, capacity, hard_decision_w
from ldpc_bounds.ensembles import CheckProfile
from ldpc_bounds.quantizer import QuantizationScheme

from oracles import (
    bec_density_constants, bec_rate_bound, bsc_density_constants, h2, two_level_rate_bound,
)

PROFILES = [CheckProfile.regular(6, 0.5), CheckProfile.regular(6, 1 / 3), CheckProfile.regular(4, 0.25),
            CheckProfile({5: 0.4, 7: 0.6}, 0.45)]


def test_parse_method():
    assert parse_method("2level") == (TWO_LEVEL, None)
    assert parse_method("quantized:3") == ("quantized", 3)
    assert parse_method("quantized(2)") == ("quantized", 2)
    assert parse_method("Unquantized") == (UNQUANTIZED, None)
    for bad in ("quantized:1", "three", "quantized:"):
        with pytest.raises(ValueError):
            parse_method(bad)


def test_binary_entropy_symmetry():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.2) == pytest.approx(binary_entropy(0.8), abs=1e-15)


@pytest.mark.parametrize("prof", PROFILES)
@pytest.mark.parametrize("w", [0.02, 0.11])
def test_bsc_rate_bounds_agree(prof, w):
    ch = ChannelModel.bsc(w)
    ref = two_level_rate_bound(1 - h2(w), w, prof.fractions)
    assert rate_ub_two_level(ch, prof).value == pytest.approx(ref, abs=1e-12)
    assert rate_ub_quantized(ch, 2, prof).value == pytest.approx(ref, abs=1e-9)
    assert rate_ub_quantized(ch, 3, prof).value == pytest.approx(ref, abs=1e-9)
    assert rate_ub_unquantized(ch, prof).value == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("prof", PROFILES)
@pytest.mark.parametrize("p", [0.05, 0.3, 0.6])
def test_bec_unquantized_rate_closed_form(prof, p):
    ch = ChannelModel.bec(p)
    assert rate_ub_unquantized(ch, prof).value == pytest.approx(bec_rate_bound(p, prof.fractions), abs=1e-12)
    # the quantized bound with any levels is the same here
    assert rate_ub_quantized(ch, 2, prof).value == pytest.approx(bec_rate_bound(p, prof.fractions), abs=1e-12)


def test_bec_two_level_uses_half_erasure_crossover():
    p = 0.3
    prof = PROFILES[0]
    ref = two_level_rate_bound(1 - p, p / 2, prof.fractions)
    assert rate_ub_two_level(ChannelModel.bec(p), prof).value == pytest.approx(ref, abs=1e-14)


def test_noiseless_convention():
    prof = PROFILES[0]
    for ch in (ChannelModel.bsc(0.0), ChannelModel.bec(0.0)):
        assert rate_ub_two_level(ch, prof).value == 1.0
        assert rate_ub_quantized(ch, 2, prof).value == 1.0
        assert rate_ub_unquantized(ch, prof).value == 1.0
        res = density_lb_two_level(ch, 0.1)
        assert res.value == 0.0 and res.diagnostics.vacuous


@pytest.mark.parametrize("sigma", [0.3, 0.6, 0.9, 1.2, 2.0])
@pytest.mark.parametrize("prof", PROFILES[:3])
def test_awgn_rate_bound_ordering(sigma, prof):
    ch = ChannelModel.biawgn(sigma)
    two = rate_ub_two_level(ch, prof).value
    q2 = rate_ub_quantized(ch, 2, prof).value
    q3 = rate_ub_quantized(ch, 3, prof).value
    un = rate_ub_unquantized(ch, prof).value
    assert un <= q3 + 1e-9 and q3 <= q2 + 1e-9 and q2 <= two + 1e-9


def test_quantized_hard_decision_term_is_level_independent():
    ch = ChannelModel.biawgn(0.4)
    prof = PROFILES[0]
    w = hard_decision_w(ch)
    term_b = 2 * w / (1 - (1 - 2 * w) ** 6)
    for lv in [(0.5,), (4.0,), (30.0,)]:
        res = rate_ub_quantized(ch, 2, prof, QuantizationScheme(2, lv))
        assert res.value <= 1 - term_b + 1e-15
    res = rate_ub_quantized(ch, 2, prof)
    assert res.active_term == "hard_decision"
    assert res.value == pytest.approx(1 - term_b, abs=1e-15)


@pytest.mark.parametrize("method,d", [("two_level", None), ("quantized", 2), ("unquantized", None)])
def test_entropy_and_rate_bounds_are_consistent(method, d):
    ch = ChannelModel.biawgn(0.95)
    prof = PROFILES[0]
    if method == "two_level":
        w = hard_decision_w(ch)
        scheme = QuantizationScheme(2, (0.0,))  # sign quantizer: only the sign survives
        r = rate_ub_two_level(ch, prof).value
        ent = lambda R: entropy_lb_quantized(ch, scheme, R, prof)
    elif method == "quantized":
        res = rate_ub_quantized(ch, d, prof)
        assert res.active_term == "entropy"
        r = res.value
        scheme = QuantizationScheme(d, res.levels)
        ent = lambda R: entropy_lb_quantized(ch, scheme, R, prof)
    else:
        r = rate_ub_unquantized(ch, prof).value
        ent = lambda R: entropy_lb_unquantized(ch, R, prof)
    assert ent(r - 1e-6) < 0 < ent(r + 1e-6)


def test_entropy_bounds_at_rate_one_and_noiseless():
    ch = ChannelModel.biawgn(0.8)
    prof = PROFILES[0]
    assert entropy_lb_unquantized(ch, 1.0, prof) == pytest.approx(1 - capacity(ch), abs=1e-15)
    assert entropy_lb_unquantized(ChannelModel.bsc(0.0), 0.5, prof) <= 0.0
    with pytest.raises(ValueError):
        entropy_lb_unquantized(ch, 0.0, prof)


def test_bec_unquantized_entropy_closed_form():
    p, R = 0.4, 0.5
    prof = PROFILES[0]
    val = entropy_lb_unquantized(ChannelModel.bec(p), R, prof)
    assert val == pytest.approx(p - (1 - R) * (1 - (1 - p) ** 6), abs=1e-14)


@pytest.mark.parametrize("w", [0.02, 0.05, 0.11])
def test_bsc_density_constants_coincide(w):
    ch = ChannelModel.bsc(w)
    k1, k2 = bsc_density_constants(w)
    for res in (density_lb_two_level(ch, 0.05), density_lb_quantized(ch, 2, 0.05),
                density_lb_quantized(ch, 3, 0.05), density_lb_unquantized(ch, 0.05)):
        assert res.k1 == pytest.approx(k1, abs=1e-9)
        assert res.k2 == pytest.approx(k2, abs=1e-9)


@pytest.mark.parametrize("p", [0.1, 0.3, 0.45])
def test_bec_unquantized_density_matches_erasure_constants(p):
    ch = ChannelModel.bec(p)
    k1, k2 = bec_density_constants(p)
    res = density_lb_unquantized(ch, 0.05)
    assert res.x_star == pytest.approx(1 - p, abs=1e-12)
    assert res.k1 == pytest.approx(k1, abs=1e-12) and res.k2 == pytest.approx(k2, abs=1e-12)
    two = density_lb_two_level(ch, 0.05)
    assert res.value == pytest.approx(two.value, abs=1e-12)


def test_bec_density_vacuous_when_eps_large():
    p = 0.3
    res = density_lb_two_level(ChannelModel.bec(p), 0.5)  # 0.5 >= p / (1 - p)
    assert res.value <= 0 and res.diagnostics.vacuous and not res.diagnostics.clamped
    res = density_lb_unquantized(ChannelModel.bec(p), 0.5)
    assert res.diagnostics.vacuous


@pytest.mark.parametrize("sigma", [0.7, 0.9, 1.1])
def test_awgn_density_ordering(sigma):
    ch = ChannelModel.biawgn(sigma)
    for eps in (0.01, 0.05, 0.1):
        two = density_lb_two_level(ch, eps).value
        q2 = density_lb_quantized(ch, 2, eps).value
        q3 = density_lb_quantized(ch, 3, eps).value
        un = density_lb_unquantized(ch, eps).value
        assert two <= q2 <= q3 <= un + 1e-12


def test_density_increases_as_eps_decreases():
    ch = ChannelModel.biawgn(0.85)
    for method, d in ((TWO_LEVEL, None), ("quantized", 2), (UNQUANTIZED, None)):
        vals = [density_bound(ch, e, method, d).value for e in (0.2, 0.1, 0.05, 0.01)]
        assert all(a < b for a, b in zip(vals, vals[1:]))


def test_unquantized_density_optimum_at_first_moment():
    ch = ChannelModel.biawgn(0.9)
    res = density_lb_unquantized(ch, 0.05)
    from ldpc_bounds.channels import llr_distribution, moment_m
    a = moment_m(llr_distribution(ch), 1)
    assert res.x_star == pytest.approx(a, rel=1e-12)


def test_density_epsilon_domain():
    with pytest.raises(ValueError):
        density_lb_two_level(ChannelModel.bsc(0.1), 1.0)
    with pytest.raises(ValueError):
        density_lb_unquantized(ChannelModel.bsc(0.1), 0.0)


def test_series_identity_on_bsc():
    # sum_p x^{2p} / (p (2p - 1)) = 2 ln 2 (1 - h2((1 - x) / 2))
    w, k = 0.05, 6
    s = tanh_series(ChannelModel.bsc(w), CheckProfile.regular(k, 0.5))
    x = (1 - 2 * w) ** k
    assert s.value == pytest.approx(2 * math.log(2) * (1 - h2((1 - x) / 2)), abs=1e-12)
    assert s.bracket == pytest.approx(h2((1 - x) / 2), abs=1e-12)


@pytest.mark.parametrize("sigma", [0.3, 0.88])
def test_series_cap_doubling(sigma):
    ch = ChannelModel.biawgn(sigma)
    prof = PROFILES[0]
    a = rate_ub_unquantized(ch, prof)
    b = rate_ub_unquantized(ch, prof, series=SeriesConfig().doubled())
    assert abs(a.value - b.value) < 1e-9
    assert not a.diagnostics.flagged


def test_bound_result_serializes():
    res = rate_ub_quantized(ChannelModel.biawgn(0.9), 2, PROFILES[0])
    d = res.to_dict()
    assert d["method"] == "quantized(2)" and isinstance(d["levels"], list)
    assert rate_bound(ChannelModel.biawgn(0.9), PROFILES[0], "quantized", 2).value == res.value
