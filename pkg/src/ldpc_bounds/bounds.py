"""Converse bounds: conditional-entropy lower bounds, rate upper bounds and
parity-check density lower bounds, with 2-level, 2^d-level and un-quantized
treatments of the channel LLR.
"""
from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from .channels import (
    BEC, DEFAULT_QUADRATURE, LN2, ChannelModel, Quadrature, capacity_gap_with_error,
    h2, hard_decision_w, llr_distribution,
)
from .ensembles import CheckProfile
from .quantizer import (
    QuantizationScheme, bin_probabilities, density_objective, optimize_levels_density,
    optimize_levels_rate, quantized_parity_entropy,
)

TWO_LEVEL = "two_level"
UNQUANTIZED = "unquantized"


def quantized_method(d: int) -> str:
    return f"quantized({d})"


def parse_method(text: str) -> tuple[str, int | None]:
    """Accepts ``2level``/``two_level``, ``quantized:D``/``quantized(D)``, ``unquantized``."""
    t = text.strip().lower()
    if t in ("2level", "2-level", "two_level", "two-level"):
        return TWO_LEVEL, None
    if t in ("unquantized", "un-quantized"):
        return UNQUANTIZED, None
    m = re.fullmatch(r"quantized[:(](\d+)\)?", t)
    if m and int(m.group(1)) >= 2:
        return "quantized", int(m.group(1))
    raise ValueError(f"unknown bound method {text!r}")


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation of the tanh-moment series.

    Terms are summed until one drops below ``term_tol`` or ``max_terms`` is
    reached; a tail bound above ``tail_tol`` flags the result.
    """

    term_tol: float = 1e-14
    max_terms: int = 2000
    tail_tol: float = 1e-10
    block: int = 64

    def doubled(self) -> SeriesConfig:
        return SeriesConfig(self.term_tol, 2 * self.max_terms, self.tail_tol, self.block)


DEFAULT_SERIES = SeriesConfig()


@dataclass(frozen=True)
class Diagnostics:
    series_terms: int | None = None
    series_tail: float | None = None
    quadrature_error: float | None = None
    solver_residual: float | None = None
    clamped: bool = False
    vacuous: bool = False
    flagged: bool = False
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class BoundResult:
    value: float
    method: str
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    k1: float | None = None
    k2: float | None = None
    x_star: float | None = None
    levels: tuple[float, ...] | None = None
    active_term: str | None = None

    def to_dict(self):
        out = asdict(self)
        out["diagnostics"]["notes"] = list(self.diagnostics.notes)
        if self.levels is not None:
            out["levels"] = list(self.levels)
        return out


def binary_entropy(x: float) -> float:
    return h2(x)


def _parity_h2(x, k):
    # h2((1 - x^k) / 2) without cancellation when x^k is close to 1
    if x <= 0.0:
        return 1.0
    return h2(-0.5 * math.expm1(k * math.log(x)))


def _check_rate(rate):
    if not 0.0 < rate <= 1.0:
        raise ValueError("rate must lie in (0, 1]")


def _check_epsilon(epsilon):
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")


# -- entropy lower bounds ----------------------------------------------------

def entropy_lb_quantized(channel: ChannelModel, scheme: QuantizationScheme, rate: float,
                         profile: CheckProfile, quad: Quadrature = DEFAULT_QUADRATURE) -> float:
    """Lower bound on H(X|Y)/n from a 2^d-level quantization of the LLR."""
    _check_rate(rate)
    gap = capacity_gap_with_error(channel, quad).value
    bins = bin_probabilities(channel, scheme)
    return gap - (1.0 - rate) * quantized_parity_entropy(bins, profile)


@dataclass(frozen=True)
class _Series:
    """The tanh-moment series S and its complement 1 - S / (2 ln 2).

    ``bracket`` is summed from positive terms only, so it stays accurate
    when S is within rounding of 2 ln 2 (high SNR). ``tail`` bounds the
    truncation error on the scale of S.
    """

    bracket: float
    terms: int
    tail: float
    quad_error: float

    @property
    def value(self) -> float:
        return 2.0 * LN2 * (1.0 - self.bracket)


def _c_partial(n):
    # sum_{p=1}^n 1 / (p (2p - 1))
    p = np.arange(1, n + 1, dtype=float)
    return math.fsum((1.0 / (p * (2.0 * p - 1.0))).tolist())


def _c_tail(n):
    """sum_{p > n} 1 / (p (2p - 1)); asymptotic expansion once n is large."""
    if n < 1000:
        return max(2.0 * LN2 - _c_partial(int(n)), 0.0)
    return 1.0 / (2.0 * n) - 1.0 / (8.0 * n * n) + 1.0 / (64.0 * n ** 4)


_TAIL_RATIO = 1.05
_TAIL_CHUNK = 256
_TAIL_MAX_EXPONENT = 1e300
_GAP_FLOOR = 1e-18


def _profile_terms(moments, complements, degrees, weights):
    """g_p = sum_k d_k M^k and h_p = sum_k d_k (1 - M^k), the latter via expm1."""
    m = np.clip(moments, 0.0, 1.0)
    c = np.clip(complements, 0.0, 1.0)
    g = (m[:, None] ** degrees[None, :]) @ weights
    with np.errstate(divide="ignore"):
        h = -np.expm1(degrees[None, :] * np.log1p(-c)[:, None]) @ weights
    return g, h


def _series_tail(dist, degrees, weights, g_inf, h_inf, p_last, quad):
    """Estimate sum_{p > p_last} c_p h_p from geometrically spaced samples.

    The sum over integers b_j < p <= b_{j+1} is read as an integral from
    b_j + 1/2 to b_{j+1} + 1/2, so h is sampled at those half-integer
    points; it is nondecreasing, so each block is bracketed by its end
    values and their average is a trapezoid rule in the measure c_p.
    Halving the sample set and extrapolating (Richardson) removes the
    leading error term; the error estimate compares that extrapolation with
    the same one done on half the samples, plus the width of the final
    bracket. Once g is within 1e-18 of its limit the
    rest is h_inf times the tail of c_p.
    """
    bs = []
    hs = []
    gaps = []
    quad_err = 0.0
    start = float(p_last)
    while (not gaps or gaps[-1] > _GAP_FLOOR) and start < _TAIL_MAX_EXPONENT:
        b = start * _TAIL_RATIO ** np.arange(0, _TAIL_CHUNK)
        b = np.unique(np.floor(b[b < _TAIL_MAX_EXPONENT]))
        b = b[b > bs[-1]] if bs else b
        direct, comp, err = dist.tanh_power_moments(b + 0.5, quad)
        quad_err = max(quad_err, err)
        g, h = _profile_terms(direct, comp, degrees, weights)
        for bj, gj, hj in zip(b, g, h):
            bs.append(float(bj))
            hs.append(min(max(hj, hs[-1]), h_inf) if hs else min(hj, h_inf))
            gaps.append(max(min(gj - g_inf, gaps[-1]), 0.0) if gaps else max(gj - g_inf, 0.0))
            if gaps[-1] <= _GAP_FLOOR:
                break
        start = bs[-1] * _TAIL_RATIO

    def estimate(bb, hh):
        tails = [_c_tail(x) for x in bb]
        return math.fsum((tails[j] - tails[j + 1]) * 0.5 * (hh[j] + hh[j + 1]) for j in range(len(bb) - 1))

    def thinned(step):
        idx = list(range(0, len(bs), step))
        if idx[-1] != len(bs) - 1:
            idx.append(len(bs) - 1)
        return estimate([bs[i] for i in idx], [hs[i] for i in idx])

    e1, e2, e4 = estimate(bs, hs), thinned(2), thinned(4)
    fine = e1 + (e1 - e2) / 3.0
    coarse = e2 + (e2 - e4) / 3.0
    rest = h_inf * _c_tail(bs[-1])
    return fine + rest, abs(fine - coarse) + gaps[-1] * _c_tail(bs[-1]), quad_err


def tanh_series(channel: ChannelModel, profile: CheckProfile,
                quad: Quadrature = DEFAULT_QUADRATURE,
                series: SeriesConfig = DEFAULT_SERIES) -> _Series:
    """S = sum_p 1/(p(2p-1)) sum_k d_k M_{2p}^k, with M_{2p} the tanh moments.

    What the bounds use is 1 - S / (2 ln 2). Since sum_p 1/(p(2p-1)) = 2 ln 2
    this equals sum_p c_p h_p / (2 ln 2) with h_p = sum_k d_k (1 - M_{2p}^k),
    a sum of nonnegative terms that is evaluated directly. Summation stops
    once g_p = sum_k d_k M_{2p}^k is within a term of its limit (the mass at
    LLR = +inf); the remaining terms are then h_inf times the tail of c_p.
    If ``max_terms`` is hit first, the remainder is estimated from moments
    at geometrically spaced p.
    """
    dist = llr_distribution(channel)
    m_inf = dist.infinite_mass
    degrees = np.array(list(profile.fractions), dtype=float)
    weights = np.array(list(profile.fractions.values()))
    g_inf = float(weights @ m_inf ** degrees)
    h_inf = float(weights @ -np.expm1(degrees * math.log(m_inf))) if m_inf > 0 else 1.0

    parts = []
    quad_err = 0.0
    p = 1
    last_gap = last_h = 0.0
    done = False
    while p <= series.max_terms and not done:
        stop = min(p + series.block, series.max_terms + 1)
        direct, comp, err = dist.tanh_power_moments(np.arange(p, stop, dtype=float), quad)
        quad_err = max(quad_err, err)
        g, h = _profile_terms(direct, comp, degrees, weights)
        for offset in range(g.size):
            pp = p + offset
            c = 1.0 / (pp * (2.0 * pp - 1.0))
            last_gap = max(g[offset] - g_inf, 0.0)
            last_h = h[offset]
            parts.append(c * last_h)
            if c * last_gap < series.term_tol:
                done = True
                break
        p = stop
    n_terms = len(parts)
    if done:
        parts.append(h_inf * _c_tail(n_terms))
        tail = last_gap * _c_tail(n_terms)
    else:
        extra, tail, tail_quad_err = _series_tail(dist, degrees, weights, g_inf, h_inf, n_terms, quad)
        parts.append(extra)
        quad_err = max(quad_err, tail_quad_err)
    bracket = min(max(math.fsum(parts) / (2.0 * LN2), 0.0), 1.0)
    return _Series(bracket, n_terms, float(tail), float(quad_err))


def entropy_lb_unquantized(channel: ChannelModel, rate: float, profile: CheckProfile,
                           quad: Quadrature = DEFAULT_QUADRATURE,
                           series: SeriesConfig = DEFAULT_SERIES) -> float:
    """Lower bound on H(X|Y)/n using the full LLR distribution."""
    _check_rate(rate)
    gap = capacity_gap_with_error(channel, quad).value
    s = tanh_series(channel, profile, quad, series)
    return gap - (1.0 - rate) * s.bracket


# -- rate upper bounds -------------------------------------------------------

def _ratio_bound(gap, denom):
    # 1 - gap / denom, with 0/0 (noiseless channel) read as 1
    if gap <= 0.0:
        return 1.0
    if denom <= 0.0:
        return -math.inf
    return 1.0 - gap / denom


def rate_ub_two_level(channel: ChannelModel, profile: CheckProfile,
                      quad: Quadrature = DEFAULT_QUADRATURE) -> BoundResult:
    """Rate bound from sign quantization of the LLR (the induced BSC)."""
    gap, qerr = capacity_gap_with_error(channel, quad)
    x = 1.0 - 2.0 * hard_decision_w(channel)
    denom = math.fsum(dk * _parity_h2(x, k) for k, dk in profile.fractions.items())
    value = _ratio_bound(gap, denom)
    return BoundResult(value, TWO_LEVEL, Diagnostics(quadrature_error=qerr))


def _hard_decision_term(w, profile):
    denom = 1.0 - math.fsum(dk * (1.0 - 2.0 * w) ** k for k, dk in profile.fractions.items())
    return 2.0 * w / denom if denom > 0.0 else 0.0


def rate_ub_quantized(channel: ChannelModel, d: int, profile: CheckProfile,
                      scheme: QuantizationScheme | None = None,
                      quad: Quadrature = DEFAULT_QUADRATURE) -> BoundResult:
    """Rate bound from a 2^d-level LLR quantizer.

    Without an explicit ``scheme`` the levels giving the tightest bound are
    searched for. The result is 1 - max(entropy term, hard-decision term);
    ``active_term`` says which one won.
    """
    gap, qerr = capacity_gap_with_error(channel, quad)
    dist = llr_distribution(channel)
    if scheme is None:
        scheme = optimize_levels_rate(dist, d, profile).scheme
    elif scheme.d != d:
        raise ValueError("scheme depth does not match d")
    bins = bin_probabilities(dist, scheme)
    entropy = quantized_parity_entropy(bins, profile)
    if gap <= 0.0:
        term_a = 0.0
    else:
        term_a = gap / entropy if entropy > 0.0 else math.inf
    term_b = _hard_decision_term(bins.lower_half_mass(), profile)
    active = "entropy" if term_a >= term_b else "hard_decision"
    value = 1.0 - max(term_a, term_b)
    return BoundResult(value, quantized_method(d), Diagnostics(quadrature_error=qerr),
                       levels=scheme.levels, active_term=active)


def rate_ub_unquantized(channel: ChannelModel, profile: CheckProfile,
                        quad: Quadrature = DEFAULT_QUADRATURE,
                        series: SeriesConfig = DEFAULT_SERIES) -> BoundResult:
    gap, qerr = capacity_gap_with_error(channel, quad)
    s = tanh_series(channel, profile, quad, series)
    value = _ratio_bound(gap, s.bracket)
    flagged = bool(s.tail > series.tail_tol)
    diag = Diagnostics(series_terms=s.terms, series_tail=s.tail,
                       quadrature_error=max(qerr, s.quad_error), flagged=flagged,
                       notes=("series tail above tolerance",) if flagged else ())
    return BoundResult(value, UNQUANTIZED, diag)


def rate_bound(channel: ChannelModel, profile: CheckProfile, method: str,
               d: int | None = None, quad: Quadrature = DEFAULT_QUADRATURE,
               series: SeriesConfig = DEFAULT_SERIES) -> BoundResult:
    """Dispatch on a method tag from :func:`parse_method`."""
    if method == TWO_LEVEL:
        return rate_ub_two_level(channel, profile, quad)
    if method == "quantized":
        return rate_ub_quantized(channel, d, profile, quad=quad)
    if method == UNQUANTIZED:
        return rate_ub_unquantized(channel, profile, quad, series)
    raise ValueError(f"unknown method {method!r}")


# -- parity-check density lower bounds --------------------------------------

def _density_value(k1, k2, epsilon):
    return (k1 + k2 * math.log(1.0 / epsilon)) / (1.0 - epsilon)


def _noiseless(method, note="noiseless channel: no density constraint"):
    return BoundResult(0.0, method, Diagnostics(vacuous=True, notes=(note,)), k1=0.0, k2=0.0)


def density_lb_two_level(channel: ChannelModel, epsilon: float,
                         quad: Quadrature = DEFAULT_QUADRATURE) -> BoundResult:
    """(K1 + K2 ln(1/eps)) / (1 - eps) with the sign-quantization constants.

    The BEC uses its sharper erasure-specific constants. Values are returned
    raw; nonpositive ones are marked vacuous.
    """
    _check_epsilon(epsilon)
    gap, qerr = capacity_gap_with_error(channel, quad)
    cap = 1.0 - gap
    if gap <= 0.0:
        return _noiseless(TWO_LEVEL)
    if channel.kind == BEC:
        p = channel.parameter
        k2 = p / ((1.0 - p) * math.log(1.0 / (1.0 - p)))
        k1 = k2 * math.log(p / (1.0 - p))
    else:
        w = hard_decision_w(channel)
        k2 = gap / (2.0 * cap * -math.log1p(-2.0 * w))
        k1 = k2 * math.log(gap / (2.0 * LN2 * cap))
    value = _density_value(k1, k2, epsilon)
    return BoundResult(value, TWO_LEVEL, Diagnostics(quadrature_error=qerr, vacuous=value <= 0.0),
                       k1=k1, k2=k2)


def density_lb_quantized(channel: ChannelModel, d: int, epsilon: float,
                         scheme: QuantizationScheme | None = None,
                         quad: Quadrature = DEFAULT_QUADRATURE) -> BoundResult:
    """Density bound from a 2^d-level quantizer; the log argument is the pair information sum."""
    _check_epsilon(epsilon)
    gap, qerr = capacity_gap_with_error(channel, quad)
    cap = 1.0 - gap
    if gap <= 0.0:
        return _noiseless(quantized_method(d))
    residual = None
    if scheme is None:
        found = optimize_levels_density(channel, d)
        scheme, residual = found.scheme, found.residual
    elif scheme.d != d:
        raise ValueError("scheme depth does not match d")
    info = density_objective(bin_probabilities(channel, scheme))
    k2 = -gap / (cap * math.log(info))
    k1 = k2 * math.log(gap / (2.0 * LN2 * cap))
    value = _density_value(k1, k2, epsilon)
    diag = Diagnostics(quadrature_error=qerr, solver_residual=residual, vacuous=value <= 0.0)
    return BoundResult(value, quantized_method(d), diag, k1=k1, k2=k2, levels=scheme.levels)


def density_lb_unquantized(channel: ChannelModel, epsilon: float,
                           quad: Quadrature = DEFAULT_QUADRATURE,
                           grid_points: int = 512) -> BoundResult:
    """Supremum over x in (0, A] of (K1(x) + K2(x) ln(1/eps)) / (1 - eps).

    A is the first tanh moment of the LLR. The supremum is found on a
    log-spaced grid and refined around the best grid point. When the bound
    is vacuous the supremum is 0, approached only as x -> 0; the raw value
    at x = A is reported with the vacuous flag instead.
    """
    _check_epsilon(epsilon)
    gap, qerr = capacity_gap_with_error(channel, quad)
    cap = 1.0 - gap
    if gap <= 0.0:
        return _noiseless(UNQUANTIZED)
    dist = llr_distribution(channel)
    a_res = dist.tanh_moments(1, 2, quad)
    a = float(a_res.value[0])
    xi = 1.0 if channel.kind == BEC else 1.0 / (2.0 * LN2)
    scale = gap / cap
    lead = math.log(xi * scale)

    def constants(x):
        k2 = scale / math.log(1.0 / x)
        return k2 * lead, k2

    def objective(x):
        return _density_value(*constants(x), epsilon)

    diag_err = max(qerr, a_res.error)
    if lead + math.log(1.0 / epsilon) <= 0.0:
        k1, k2 = constants(a)
        note = "bound is vacuous; its supremum 0 is approached only as x -> 0"
        return BoundResult(objective(a), UNQUANTIZED,
                           Diagnostics(quadrature_error=diag_err, vacuous=True, notes=(note,)),
                           k1=k1, k2=k2, x_star=a)

    grid = a * np.logspace(-12.0, 0.0, grid_points)
    grid[-1] = a
    vals = np.array([objective(x) for x in grid])
    i = int(np.argmax(vals))
    best_x, best_v = float(grid[i]), float(vals[i])
    lo = float(grid[max(i - 1, 0)])
    hi = float(grid[min(i + 1, grid_points - 1)])
    if hi > lo:
        ref = optimize.minimize_scalar(lambda x: -objective(x), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-14 * a})
        if -ref.fun > best_v:
            best_x, best_v = float(ref.x), float(-ref.fun)
    k1, k2 = constants(best_x)
    return BoundResult(best_v, UNQUANTIZED,
                       Diagnostics(quadrature_error=diag_err, vacuous=best_v <= 0.0),
                       k1=k1, k2=k2, x_star=best_x)


def density_bound(channel: ChannelModel, epsilon: float, method: str, d: int | None = None,
                  quad: Quadrature = DEFAULT_QUADRATURE) -> BoundResult:
    if method == TWO_LEVEL:
        return density_lb_two_level(channel, epsilon, quad)
    if method == "quantized":
        return density_lb_quantized(channel, d, epsilon, quad=quad)
    if method == UNQUANTIZED:
        return density_lb_unquantized(channel, epsilon, quad)
    raise ValueError(f"unknown method {method!r}")
