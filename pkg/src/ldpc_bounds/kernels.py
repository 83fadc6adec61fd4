"""Numeric inner loops.

Two kernels dominate run time: the multinomial expectation over compositions
of a check degree (quantized bounds, evaluated thousands of times inside the
level search) and the weighted power sums that feed the tanh-moment series. Each has a
loop implementation compiled with numba and a vectorised numpy one; the
module-level names point at whichever backend ``_jit`` selected.
"""
import math
from functools import lru_cache
from itertools import combinations

import numpy as np

from ._jit import USE_NUMBA, njit

MAX_COMPOSITION_TERMS = 10_000_000
EXACT_COEFFICIENT_MAX_K = 60


class CompositionOverflowError(ValueError):
    """Raised when enumerating compositions would exceed the term budget."""

    def __init__(self, k, parts, count):
        self.k = k
        self.parts = parts
        self.count = count
        super().__init__(
            f"{count} compositions of k={k} into {parts} parts exceeds the "
            f"limit of {MAX_COMPOSITION_TERMS} terms"
        )


def composition_count(k, parts):
    return math.comb(k + parts - 1, parts - 1)


@lru_cache(maxsize=256)
def compositions(k, parts):
    """All ``parts``-tuples of nonnegative ints summing to ``k``, colex order.

    Returned as a read-only ``(count, parts)`` int64 array.
    """
    if k < 0 or parts < 1:
        raise ValueError("need k >= 0 and parts >= 1")
    count = composition_count(k, parts)
    if count > MAX_COMPOSITION_TERMS:
        raise CompositionOverflowError(k, parts, count)
    rows = []
    # stars and bars: bar positions among k + parts - 1 slots
    for bars in combinations(range(k + parts - 1), parts - 1):
        prev = -1
        row = []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(k + parts - 2 - prev)
        rows.append(tuple(row))
    rows.sort(key=lambda r: r[::-1])
    out = np.array(rows, dtype=np.int64).reshape(count, parts)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=256)
def multinomial_log_coefficients(k, parts):
    """log of k!/(c_0!...c_{n-1}!) for every row of ``compositions(k, parts)``."""
    comps = compositions(k, parts)
    if k <= EXACT_COEFFICIENT_MAX_K:
        fk = math.factorial(k)
        vals = [math.log(fk // math.prod(math.factorial(int(c)) for c in row)) for row in comps]
    else:
        lk = math.lgamma(k + 1)
        vals = [lk - sum(math.lgamma(int(c) + 1) for c in row) for row in comps]
    out = np.array(vals, dtype=np.float64)
    out.setflags(write=False)
    return out


@njit
def _h2(x):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -(x * np.log2(x) + (1.0 - x) * np.log2(1.0 - x))


@njit
def _composition_expectation_loop(comps, log_coef, q, t):
    m, n = comps.shape
    logq = np.empty(n)
    logt = np.empty(n)
    for i in range(n):
        logq[i] = np.log(q[i]) if q[i] > 0.0 else -np.inf
        logt[i] = np.log(t[i]) if t[i] > 0.0 else -np.inf
    total = 0.0
    for r in range(m):
        logw = log_coef[r]
        s = 0.0
        dead = False
        for i in range(n):
            c = comps[r, i]
            if c == 0:
                continue
            if logq[i] == -np.inf:
                dead = True
                break
            logw += c * logq[i]
            s += c * logt[i]
        if dead:
            continue
        x = 0.5 if s == -np.inf else -0.5 * np.expm1(s)
        total += np.exp(logw) * _h2(x)
    return total


def _composition_expectation_numpy(comps, log_coef, q, t):
    active = comps > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        logq = np.log(q)
        logt = np.log(t)
        # 0 * -inf from unused parts is masked out
        logw = log_coef + np.where(active, comps * logq, 0.0).sum(axis=1)
        s = np.where(active, comps * logt, 0.0).sum(axis=1)
    x = np.where(np.isneginf(s), 0.5, -0.5 * np.expm1(s))
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(x * np.log2(x) + (1.0 - x) * np.log2(1.0 - x))
    h = np.where((x <= 0.0) | (x >= 1.0), 0.0, h)
    w = np.exp(logw)
    return float(np.sum(np.where(w > 0.0, w * h, 0.0)))


def composition_expectation(k, q, t):
    """Sum over compositions c of k into len(q) parts of

        multinomial(k; c) * prod q_i^c_i * h2((1 - prod t_i^c_i) / 2).

    ``q`` are pair masses and ``t`` the pair reliabilities in [0, 1]. Pairs with
    zero mass drop out because every composition that touches them has zero
    weight.
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    t = np.clip(np.ascontiguousarray(t, dtype=np.float64), 0.0, 1.0)
    comps = compositions(int(k), q.size)
    log_coef = multinomial_log_coefficients(int(k), q.size)
    if USE_NUMBA:
        return float(_composition_expectation_loop(comps, log_coef, q, t))
    return _composition_expectation_numpy(comps, log_coef, q, t)


@njit
def _log_power_sums_loop(log_base, weights, exponents):
    direct = np.zeros(exponents.size)
    complement = np.zeros(exponents.size)
    for j in range(log_base.size):
        wj = weights[j]
        if wj == 0.0:
            continue
        lb = log_base[j]
        for r in range(exponents.size):
            x = exponents[r] * lb
            if x == -np.inf or x < -745.0:
                # exp underflows from here on; exponents are increasing
                for rr in range(r, exponents.size):
                    complement[rr] += wj
                break
            direct[r] += wj * np.exp(x)
            complement[r] -= wj * np.expm1(x)
    return direct, complement


def _log_power_sums_numpy(log_base, weights, exponents, block=128):
    direct = np.empty(exponents.size)
    complement = np.empty(exponents.size)
    with np.errstate(invalid="ignore"):
        for lo in range(0, exponents.size, block):
            x = exponents[lo:lo + block, None] * log_base[None, :]
            x = np.where(np.isnan(x), 0.0, x)
            direct[lo:lo + block] = np.exp(x) @ weights
            complement[lo:lo + block] = -np.expm1(x) @ weights
    return direct, complement


def log_power_sums(log_base, weights, exponents):
    """Weighted sums of b^e and of 1 - b^e, given log b, for increasing exponents e.

    Returns ``(direct, complement)``; the complement is accumulated through
    ``expm1`` so it stays accurate when every b^e is close to 1.
    """
    log_base = np.ascontiguousarray(log_base, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    exponents = np.ascontiguousarray(exponents, dtype=np.float64)
    if USE_NUMBA:
        return _log_power_sums_loop(log_base, weights, exponents)
    return _log_power_sums_numpy(log_base, weights, exponents)
