"""Symmetric 2^d-level LLR quantizers.

Bins are indexed 0 .. 2^d - 1 from the most reliable positive LLRs down to
the most reliable negative ones. Bin ``i`` on the positive side is paired
with its reflection ``2^d - 1 - i``; every pair-based quantity below
(reliabilities, the information objective, the parity entropy) uses that
pairing.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .channels import ChannelModel, LlrDistribution, llr_distribution
from .ensembles import CheckProfile
from .kernels import composition_expectation

RESIDUAL_TOL = 1e-8
_TIE_TOL = 1e-15
_GRID_BUDGET = 500
_N_POLISH = 3


@dataclass(frozen=True)
class QuantizationScheme:
    """Quantization depth ``d`` and levels l_1 >= ... >= l_{2^(d-1)-1} >= 0."""

    d: int
    levels: tuple[float, ...]

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValueError("quantization depth d must be an integer >= 2")
        levels = tuple(float(v) for v in self.levels)
        n = 2 ** (self.d - 1) - 1
        if len(levels) != n:
            raise ValueError(f"d={self.d} needs {n} levels, got {len(levels)}")
        if any(math.isnan(v) or v < 0.0 for v in levels):
            raise ValueError("quantization levels must be nonnegative")
        if any(a < b for a, b in zip(levels, levels[1:])):
            raise ValueError("quantization levels must be nonincreasing")
        object.__setattr__(self, "levels", levels)

    @property
    def n_pairs(self) -> int:
        return 2 ** (self.d - 1)


@dataclass(frozen=True)
class BinProbabilities:
    """p_0 .. p_{2^d - 1} for one channel and one quantizer."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 1 or p.size < 4 or p.size & (p.size - 1):
            raise ValueError("need 2^d bin probabilities with d >= 2")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def d(self) -> int:
        return int(self.p.size).bit_length() - 1

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """(p_i, p_{2^d-1-i}) for i = 0 .. 2^(d-1) - 1."""
        half = self.p.size // 2
        return self.p[:half], self.p[::-1][:half]

    def lower_half_mass(self) -> float:
        return math.fsum(self.p[self.p.size // 2:])


def _as_distribution(source):
    if isinstance(source, LlrDistribution):
        return source
    return llr_distribution(source)


def _pair_masses(dist: LlrDistribution, levels) -> tuple[np.ndarray, np.ndarray]:
    n = len(levels)
    edges = (math.inf,) + tuple(levels)
    upper = np.empty(n + 1)
    lower = np.empty(n + 1)
    for j in range(n):
        upper[j] = dist.interval_mass(edges[j + 1], edges[j])
        lower[j] = dist.interval_mass(-edges[j], -edges[j + 1], lo_closed=True, hi_closed=False)
    half_zero = 0.5 * dist.point_mass(0.0)
    upper[n] = dist.interval_mass(0.0, edges[n]) + half_zero
    lower[n] = dist.interval_mass(-edges[n], 0.0, lo_closed=True, hi_closed=False) + half_zero
    return upper, lower


def bin_probabilities(channel: ChannelModel | LlrDistribution,
                      scheme: QuantizationScheme) -> BinProbabilities:
    """Bin masses given X = 0; the mass at LLR = 0 is split between the two middle bins."""
    upper, lower = _pair_masses(_as_distribution(channel), scheme.levels)
    return BinProbabilities(np.concatenate([upper, lower[::-1]]))


def _reliabilities(upper, lower):
    q = upper + lower
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(q > 0.0, (upper - lower) / q, 0.0)
    return q, np.clip(t, 0.0, 1.0)


def pair_statistics(bins: BinProbabilities) -> tuple[np.ndarray, np.ndarray]:
    """Pair masses q_i = p_i + p_mirror and reliabilities (p_i - p_mirror) / q_i."""
    return _reliabilities(*bins.pairs())


def _information(upper, lower):
    q = upper + lower
    mask = q > 0.0
    return math.fsum(((upper[mask] - lower[mask]) ** 2 / q[mask]).tolist())


def density_objective(bins: BinProbabilities) -> float:
    """sum over pairs of (p_i - p_mirror)^2 / (p_i + p_mirror); empty pairs skipped."""
    return _information(*bins.pairs())


def _parity_entropy(upper, lower, profile):
    q, t = _reliabilities(upper, lower)
    return math.fsum(dk * composition_expectation(k, q, t) for k, dk in profile.fractions.items())


def quantized_parity_entropy(bins: BinProbabilities, profile: CheckProfile) -> float:
    """Multinomial average of the parity-bit entropy over check degrees.

    For each degree k with fraction d_k this sums, over every way of
    spreading the k bits among the bin pairs, the probability of that
    spread times h2((1 - prod t_i^{k_i}) / 2).
    """
    return _parity_entropy(*bins.pairs(), profile)


def _stationarity_gaps(upper, lower, levels):
    gaps = np.empty(len(levels))
    for i, lv in enumerate(levels, start=1):
        e = math.exp(-lv)
        a = (lower[i] ** 2 + e * upper[i] ** 2) / (upper[i] + lower[i]) ** 2
        b = (lower[i - 1] ** 2 + e * upper[i - 1] ** 2) / (upper[i - 1] + lower[i - 1]) ** 2
        gaps[i - 1] = a - b
    return gaps


def stationarity_residual(channel: ChannelModel | LlrDistribution,
                          scheme: QuantizationScheme) -> float:
    """Largest violation of the first-order conditions for the information objective.

    For each level l_i the two adjacent pairs must balance:
    (q_i^2 + e^-l_i p_i^2) / (p_i + q_i)^2 equal to the same expression on
    pair i - 1, where q_i is the mirror mass of p_i.
    """
    dist = _as_distribution(channel)
    upper, lower = _pair_masses(dist, scheme.levels)
    with np.errstate(invalid="ignore", divide="ignore"):
        gaps = _stationarity_gaps(upper, lower, scheme.levels)
    if not np.all(np.isfinite(gaps)):
        return math.inf
    return float(np.max(np.abs(gaps)))


@dataclass(frozen=True)
class LevelSearchResult:
    scheme: QuantizationScheme
    objective: float
    residual: float | None
    evaluations: int


class LevelOptimizationError(RuntimeError):
    """The level search finished without meeting its stationarity tolerance."""

    def __init__(self, message, scheme, residual):
        super().__init__(f"{message}; best levels {scheme.levels}, residual {residual:.3e}")
        self.scheme = scheme
        self.residual = residual


def _grid_values(dist: LlrDistribution, n_levels):
    if dist.gaussian is None:
        finite = sorted({abs(l) for l, _ in dist.atoms if math.isfinite(l) and l != 0.0})
        vals = [0.0] + [0.5 * (a + b) for a, b in zip([0.0] + finite, finite)]
        if finite:
            vals.append(finite[-1] + 1.0)
        vals.append(math.inf)
        return sorted(set(vals))
    mean = dist.gaussian[0]
    mults = [0.0, 0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0, 1.2, 1.45, 1.75, 2.1, 2.6, 3.2]
    # shrink the grid until the number of monotone tuples fits the budget
    g = len(mults)
    while g > 3 and math.comb(g + n_levels, n_levels) > _GRID_BUDGET:
        g -= 1
    picks = np.unique(np.round(np.linspace(0, len(mults) - 1, g)).astype(int))
    return [mults[i] * mean for i in picks] + [math.inf]


def _candidates(values, n_levels):
    desc = sorted(values, reverse=True)
    return [tuple(c) for c in itertools.combinations_with_replacement(desc, n_levels)]


def _better(a, b, maximize):
    """True if objective a beats b beyond the tie tolerance."""
    tol = _TIE_TOL * max(1.0, abs(a), abs(b))
    return a > b + tol if maximize else a < b - tol


def _select(pool, maximize):
    best_val, best_lv = None, None
    for val, lv in pool:
        if best_val is None or _better(val, best_val, maximize):
            best_val, best_lv = val, lv
        elif not _better(best_val, val, maximize) and lv < best_lv:
            best_val, best_lv = val, lv
    return best_val, best_lv


def _levels_from_increments(u):
    return tuple(np.cumsum(np.abs(u)[::-1])[::-1].tolist())


def _search(dist, d, fn, maximize):
    """Grid scan over monotone level tuples, then bounded Powell polish of the best few."""
    n_levels = 2 ** (d - 1) - 1
    evals = 0

    def score(levels):
        nonlocal evals
        evals += 1
        return fn(*_pair_masses(dist, levels))

    pool = [(score(lv), lv) for lv in _candidates(_grid_values(dist, n_levels), n_levels)]
    if dist.gaussian is None:
        return _select(pool, maximize), evals

    mean, var = dist.gaussian
    far = mean + 20.0 * math.sqrt(var)
    ranked = sorted(pool, key=lambda item: (-item[0] if maximize else item[0], item[1]))
    starts = []
    for _, lv in ranked:
        lv = tuple(min(v, far) for v in lv)
        if lv not in starts:
            starts.append(lv)
        if len(starts) == _N_POLISH:
            break
    sign = -1.0 if maximize else 1.0
    for lv in starts:
        u0 = np.diff(np.array(lv + (0.0,))[::-1])[::-1]
        res = optimize.minimize(
            lambda u: sign * score(_levels_from_increments(u)),
            u0, method="Powell", bounds=[(0.0, far)] * n_levels,
            options={"xtol": 1e-10, "ftol": 1e-15, "maxfev": 4000},
        )
        lv_opt = _levels_from_increments(res.x)
        pool.append((score(lv_opt), lv_opt))
    return _select(pool, maximize), evals


def optimize_levels_density(channel: ChannelModel | LlrDistribution, d: int) -> LevelSearchResult:
    """Levels maximising the pair information sum used by the 2^d-level density bound.

    For continuous channels the optimum is refined by solving the
    first-order conditions and must meet ``RESIDUAL_TOL``. For discrete
    channels the objective is piecewise constant; the residual is not
    computed and ``residual`` is None.
    """
    dist = _as_distribution(channel)
    (best, levels), evals = _search(dist, d, _information, maximize=True)
    if dist.gaussian is None:
        return LevelSearchResult(QuantizationScheme(d, levels), best, None, evals)

    def gaps(lv):
        lv = tuple(lv)
        return _stationarity_gaps(*_pair_masses(dist, lv), lv)

    sol = optimize.root(gaps, np.array(levels), method="hybr", options={"xtol": 1e-14})
    cand = tuple(float(v) for v in sol.x)
    if all(v >= 0 for v in cand) and all(a >= b for a, b in zip(cand, cand[1:])):
        val = _information(*_pair_masses(dist, cand))
        if val >= best - 1e-14:
            best, levels = val, cand
    scheme = QuantizationScheme(d, levels)
    with np.errstate(invalid="ignore", divide="ignore"):
        residual = float(np.max(np.abs(gaps(levels))))
    if not residual < RESIDUAL_TOL:
        raise LevelOptimizationError("stationarity residual above tolerance", scheme, residual)
    return LevelSearchResult(scheme, best, residual, evals)


def optimize_levels_rate(channel: ChannelModel | LlrDistribution, d: int,
                         profile: CheckProfile) -> LevelSearchResult:
    """Levels minimising the quantized parity entropy, i.e. the tightest rate bound.

    The second term of the rate bound depends only on the lower-half mass,
    which no choice of levels changes, so only the entropy term is searched.
    """
    dist = _as_distribution(channel)
    (best, levels), evals = _search(dist, d, lambda u, l: _parity_entropy(u, l, profile), maximize=False)
    return LevelSearchResult(QuantizationScheme(d, levels), best, None, evals)
