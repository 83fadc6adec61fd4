"""MBIOS channels, their LLR distributions and the integrals the bounds need."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import ndtr, roots_hermitenorm

from .kernels import log_power_sums

BEC = "bec"
BSC = "bsc"
BIAWGN = "biawgn"
CHANNEL_KINDS = (BEC, BSC, BIAWGN)

LN2 = math.log(2.0)


class QuadratureError(ArithmeticError):
    """A quadrature did not reach its tolerance; ``estimate`` is the last error estimate."""

    def __init__(self, message, estimate):
        super().__init__(f"{message} (error estimate {estimate:.3e})")
        self.estimate = estimate


class QuadResult(NamedTuple):
    value: float | np.ndarray
    error: float


@dataclass(frozen=True)
class Quadrature:
    """Settings for expectations against the Gaussian part of an LLR law.

    A Gauss-Hermite rule with ``nodes`` points is checked against one with
    twice as many; if they disagree by more than ``tol`` the integral is
    redone on composite Gauss-Legendre panels of width ``panel_width`` over
    mean +- ``span`` standard deviations, halving the width until two
    successive panel rules agree.
    """

    nodes: int = 128
    tol: float = 1e-10
    panel_width: float = 0.25
    panel_order: int = 16
    span: float = 14.0
    max_refinements: int = 4

    def __post_init__(self):
        if self.nodes < 64:
            raise ValueError("at least 64 Gauss-Hermite nodes are required")

    def doubled(self) -> Quadrature:
        return replace(self, nodes=2 * self.nodes, panel_width=self.panel_width / 2)


DEFAULT_QUADRATURE = Quadrature()


def _hermite_rule(n):
    # numpy's hermegauss overflows past a few hundred nodes; scipy's does not
    x, w = roots_hermitenorm(n)
    return x, w / w.sum()


_HERMITE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _hermite(n):
    if n not in _HERMITE_CACHE:
        _HERMITE_CACHE[n] = _hermite_rule(n)
    return _HERMITE_CACHE[n]


def _panel_rule(mean, sd, quad, width):
    # integrands weighted by e^-|l| peak near -mean as well as near mean
    lo = -abs(mean) - quad.span * sd
    hi = abs(mean) + quad.span * sd
    npanels = max(1, math.ceil((hi - lo) / width))
    edges = np.linspace(lo, hi, npanels + 1)
    gx, gw = np.polynomial.legendre.leggauss(quad.panel_order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    z = (x - mean) / sd
    w = w * np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))
    return x, w


def _discrepancy(cur, prev, relative):
    diff = np.abs(cur - prev)
    if relative is not False:
        scaled = diff / np.maximum(np.abs(cur), 1e-300)
        diff = np.where(relative, scaled, diff)
    return float(np.max(diff)) if diff.size else 0.0


def gaussian_expectation(evaluate: Callable, mean: float, var: float,
                         quad: Quadrature = DEFAULT_QUADRATURE, relative=False) -> QuadResult:
    """Expectation under N(mean, var) of whatever ``evaluate(x, w)`` sums.

    ``evaluate`` receives nodes and normalised weights and returns the
    weighted sum (scalar or array). ``relative`` (a bool or a mask shaped
    like the result) selects entries whose agreement is judged relative to
    their size; use it for quantities that can be tiny. The returned error
    is the max abs difference between the accepted rule and the coarser
    one before it.
    """
    sd = math.sqrt(var)
    x1, w1 = _hermite(quad.nodes)
    x2, w2 = _hermite(2 * quad.nodes)
    v1 = np.asarray(evaluate(mean + sd * x1, w1))
    v2 = np.asarray(evaluate(mean + sd * x2, w2))
    if _discrepancy(v2, v1, relative) <= quad.tol:
        return QuadResult(v2 if v2.ndim else float(v2), _discrepancy(v2, v1, False))

    width = quad.panel_width
    prev = np.asarray(evaluate(*_panel_rule(mean, sd, quad, width)))
    for _ in range(quad.max_refinements):
        width /= 2
        cur = np.asarray(evaluate(*_panel_rule(mean, sd, quad, width)))
        err = _discrepancy(cur, prev, relative)
        if err <= quad.tol:
            return QuadResult(cur if cur.ndim else float(cur), _discrepancy(cur, prev, False))
        prev = cur
    raise QuadratureError("Gaussian expectation did not converge", err)


@dataclass(frozen=True)
class LlrDistribution:
    """Law of LLR(Y) given X = 0.

    ``atoms`` holds (llr, mass) pairs; llr may be ``inf``. ``gaussian`` is the
    (mean, variance) of an optional Gaussian part, whose mass is
    ``1 - sum(atom masses)``.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    gaussian: tuple[float, float] | None = None

    @property
    def atom_mass(self) -> float:
        return math.fsum(m for _, m in self.atoms)

    @property
    def continuous_mass(self) -> float:
        return 1.0 - self.atom_mass if self.gaussian is not None else 0.0

    @property
    def total_mass(self) -> float:
        return self.atom_mass + self.continuous_mass

    @property
    def infinite_mass(self) -> float:
        """Mass sitting at LLR = +inf (the perfectly reliable outputs)."""
        return math.fsum(m for l, m in self.atoms if l == math.inf)

    def pdf(self, llr):
        """Density of the continuous part (zero if there is none)."""
        llr = np.asarray(llr, dtype=float)
        if self.gaussian is None:
            return np.zeros_like(llr)
        mean, var = self.gaussian
        z = (llr - mean) / math.sqrt(var)
        return self.continuous_mass * np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi * var)

    def _gauss_interval(self, lo, hi):
        if self.gaussian is None or not lo < hi:
            return 0.0
        mean, var = self.gaussian
        sd = math.sqrt(var)
        a = (lo - mean) / sd
        b = (hi - mean) / sd
        # subtract in whichever tail keeps precision
        if a > 0:
            val = ndtr(-a) - ndtr(-b)
        else:
            val = ndtr(b) - ndtr(a)
        return self.continuous_mass * float(max(val, 0.0))

    def interval_mass(self, lo, hi, lo_closed=False, hi_closed=True) -> float:
        """Pr{lo < L <= hi} by default; closedness of each end is selectable."""
        total = self._gauss_interval(lo, hi)
        for l, m in self.atoms:
            above = l >= lo if lo_closed else l > lo
            below = l <= hi if hi_closed else l < hi
            if above and below:
                total += m
        return total

    def point_mass(self, llr) -> float:
        return math.fsum(m for l, m in self.atoms if l == llr)

    def lower_half_mass(self) -> float:
        """Pr{L < 0} + Pr{L = 0} / 2."""
        return self.interval_mass(-math.inf, 0.0, lo_closed=True, hi_closed=False) + 0.5 * self.point_mass(0.0)

    def expect(self, fn: Callable, quad: Quadrature = DEFAULT_QUADRATURE,
               relative=False) -> QuadResult:
        """E[fn(L)]; ``fn`` is vectorised and must give its limit at +inf."""
        val = 0.0
        if self.atoms:
            ls = np.array([l for l, _ in self.atoms])
            ms = np.array([m for _, m in self.atoms])
            val = math.fsum(ms * fn(ls))
        err = 0.0
        if self.gaussian is not None:
            res = gaussian_expectation(lambda x, w: w @ fn(x), *self.gaussian, quad, relative)
            val += self.continuous_mass * res.value
            err = res.error
        return QuadResult(val, err)

    def tanh_power_moments(self, exponents, quad: Quadrature = DEFAULT_QUADRATURE):
        """E[tanh^(2p)(L/2)] and E[1 - tanh^(2p)(L/2)] for increasing real p.

        Returns ``(moments, complements, error)``. The complements are summed
        through ``expm1`` rather than formed as 1 - moment, which matters at
        high SNR where every moment is within 1e-12 of one. By output symmetry
        the moments also equal the half-line integral of
        a(l) (1 + e^-l) tanh^(2p)(l/2).
        """
        exponents = np.asarray(exponents, dtype=float)
        direct = np.zeros(exponents.size)
        comp = np.zeros(exponents.size)
        for l, m in self.atoms:
            if m == 0.0:
                continue
            if l == 0.0:
                comp += m
                continue
            x = 0.0 if math.isinf(l) else exponents * _log_tanh2_half(abs(l))
            direct += m * np.exp(x)
            comp -= m * np.expm1(x)
        err = 0.0
        if self.gaussian is not None:
            res = gaussian_expectation(
                lambda x, w: np.stack(log_power_sums(_log_tanh2_half(np.abs(x)), w, exponents)),
                *self.gaussian, quad, relative=np.array([[False], [True]]),
            )
            direct += self.continuous_mass * res.value[0]
            comp += self.continuous_mass * res.value[1]
            err = res.error
        return direct, comp, err

    def tanh_moments(self, p_start: int, p_stop: int,
                     quad: Quadrature = DEFAULT_QUADRATURE) -> QuadResult:
        """E[tanh^(2p)(L/2)] for integer p in [p_start, p_stop)."""
        direct, _, err = self.tanh_power_moments(np.arange(p_start, p_stop, dtype=float), quad)
        return QuadResult(direct, err)


def _log_tanh2_half(x):
    # log tanh^2(x/2) = 2 log(1 - 2 / (e^x + 1)), accurate for large x
    with np.errstate(divide="ignore"):
        return 2.0 * np.log1p(-2.0 / (np.exp(x) + 1.0))


@dataclass(frozen=True)
class ChannelModel:
    """BEC(erasure prob), BSC(crossover prob) or BiAWGN(noise std).

    BiAWGN uses unit-energy antipodal signalling, 0 -> +1 and 1 -> -1.
    """

    kind: str
    parameter: float

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}; expected one of {CHANNEL_KINDS}")
        p = self.parameter
        if not math.isfinite(p):
            raise ValueError("channel parameter must be finite")
        if self.kind == BEC and not 0.0 <= p < 1.0:
            raise ValueError("BEC erasure probability must lie in [0, 1)")
        if self.kind == BSC and not 0.0 <= p < 0.5:
            raise ValueError("BSC crossover probability must lie in [0, 1/2)")
        if self.kind == BIAWGN and not p > 0.0:
            raise ValueError("BiAWGN noise standard deviation must be positive")

    @classmethod
    def bec(cls, p):
        return cls(BEC, float(p))

    @classmethod
    def bsc(cls, w):
        return cls(BSC, float(w))

    @classmethod
    def biawgn(cls, sigma):
        return cls(BIAWGN, float(sigma))

    @classmethod
    def biawgn_at_ebno(cls, ebno_db, rate):
        return cls(BIAWGN, ebno_db_to_sigma(ebno_db, rate))

    @property
    def is_discrete(self) -> bool:
        return self.kind != BIAWGN

    def output_pdf(self, y, x=0):
        """Conditional output density for the BiAWGN (used for checks only)."""
        if self.kind != BIAWGN:
            raise ValueError("output_pdf is only defined for the BiAWGN channel")
        s = self.parameter
        mu = 1.0 if x == 0 else -1.0
        return np.exp(-0.5 * ((np.asarray(y) - mu) / s) ** 2) / (s * math.sqrt(2.0 * math.pi))


def ebno_db_to_sigma(ebno_db, rate):
    """Noise std for a given Eb/N0 (dB), with Eb/N0 = 1 / (2 R sigma^2)."""
    if not 0.0 < rate:
        raise ValueError("rate must be positive")
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebno_db / 10.0)))


def sigma_to_ebno_db(sigma, rate):
    return 10.0 * math.log10(1.0 / (2.0 * rate * sigma * sigma))


def h2(x):
    """Binary entropy in bits, for scalars or arrays; h2(0) = h2(1) = 0."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("binary entropy argument must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(x * np.log2(x) + (1.0 - x) * np.log2(1.0 - x))
    h = np.where((x == 0.0) | (x == 1.0), 0.0, h)
    return float(h) if h.ndim == 0 else h


def llr_distribution(channel: ChannelModel) -> LlrDistribution:
    p = channel.parameter
    if channel.kind == BEC:
        atoms = ((math.inf, 1.0 - p),) + (((0.0, p),) if p > 0 else ())
        return LlrDistribution(atoms=atoms)
    if channel.kind == BSC:
        if p == 0.0:
            return LlrDistribution(atoms=((math.inf, 1.0),))
        L = math.log((1.0 - p) / p)
        return LlrDistribution(atoms=((L, 1.0 - p), (-L, p)))
    mean = 2.0 / (p * p)
    return LlrDistribution(gaussian=(mean, 2.0 * mean))


def _log2_one_plus_exp_neg(x):
    return np.logaddexp(0.0, -x) / LN2


def capacity_gap_with_error(channel: ChannelModel, quad: Quadrature = DEFAULT_QUADRATURE) -> QuadResult:
    """1 - C computed directly, so it keeps relative accuracy when C is near 1."""
    p = channel.parameter
    if channel.kind == BEC:
        return QuadResult(p, 0.0)
    if channel.kind == BSC:
        return QuadResult(h2(p), 0.0)
    return llr_distribution(channel).expect(_log2_one_plus_exp_neg, quad, relative=True)


def capacity_with_error(channel: ChannelModel, quad: Quadrature = DEFAULT_QUADRATURE) -> QuadResult:
    gap, err = capacity_gap_with_error(channel, quad)
    return QuadResult(1.0 - gap, err)


def capacity(channel: ChannelModel, quad: Quadrature = DEFAULT_QUADRATURE) -> float:
    """Capacity in bits per channel use."""
    return float(capacity_with_error(channel, quad).value)


def hard_decision_w(channel: ChannelModel) -> float:
    """Crossover probability of the sign-quantised channel.

    Computed as Pr{LLR < 0 | X=0} + Pr{LLR = 0 | X=0} / 2.
    """
    return llr_distribution(channel).lower_half_mass()


def moment_m(dist: LlrDistribution, p: int, quad: Quadrature = DEFAULT_QUADRATURE) -> float:
    """E[tanh^(2p)(L/2)], i.e. the p-th even tanh moment of the LLR."""
    if p < 1:
        raise ValueError("moment order must be a positive integer")
    return float(dist.tanh_moments(p, p + 1, quad).value[0])
