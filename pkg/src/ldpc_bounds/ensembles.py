"""Degree distributions, check-node profiles, design rate and density."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

RENORMALIZE_TOL = 1e-6


class EnsembleFormatError(ValueError):
    """Malformed ensemble description."""


def _normalized(coeffs, name, min_degree=2):
    if not coeffs:
        raise EnsembleFormatError(f"{name} has no coefficients")
    out = {}
    for deg, val in coeffs.items():
        deg = int(deg)
        val = float(val)
        if deg < min_degree:
            raise EnsembleFormatError(f"{name}: degree {deg} is below {min_degree}")
        if not math.isfinite(val) or val < 0.0:
            raise EnsembleFormatError(f"{name}: coefficient of degree {deg} must be a nonnegative number")
        if val > 0.0:
            out[deg] = out.get(deg, 0.0) + val
    total = math.fsum(out.values())
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise EnsembleFormatError(f"{name} coefficients sum to {total!r}, not 1")
    if total != 1.0:
        if abs(total - 1.0) > 1e-12:
            warnings.warn(f"{name} coefficients sum to {total!r}; renormalizing", stacklevel=3)
        out = {d: v / total for d, v in out.items()}
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective degree distributions; ``lam[i]`` is lambda_i."""

    lam: dict[int, float]
    rho: dict[int, float]

    def __post_init__(self):
        object.__setattr__(self, "lam", _normalized(self.lam, "lambda"))
        object.__setattr__(self, "rho", _normalized(self.rho, "rho"))

    @classmethod
    def regular(cls, left_degree, right_degree):
        return cls({left_degree: 1.0}, {right_degree: 1.0})

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "lambda" not in data or "rho" not in data:
            raise EnsembleFormatError('ensemble must be a JSON object with "lambda" and "rho" keys')
        for name in ("lambda", "rho"):
            if not isinstance(data[name], dict):
                raise EnsembleFormatError(f'"{name}" must map degrees to edge fractions')
            for key in data[name]:
                if not (isinstance(key, str) and key.isdigit()):
                    raise EnsembleFormatError(f'"{name}" key {key!r} is not a decimal integer degree')
        return cls(data["lambda"], data["rho"])

    def to_dict(self):
        return {
            "lambda": {str(d): v for d, v in self.lam.items()},
            "rho": {str(d): v for d, v in self.rho.items()},
        }


def load_ensemble(path) -> DegreeDistribution:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise EnsembleFormatError(f"{path}: invalid JSON ({exc})") from exc
    return DegreeDistribution.from_dict(data)


def _integral(coeffs):
    # int_0^1 sum_i c_i x^(i-1) dx
    return math.fsum(c / d for d, c in coeffs.items())


def design_rate(dist: DegreeDistribution) -> float:
    """R_d = 1 - int(rho) / int(lambda). May be negative for odd inputs."""
    return 1.0 - _integral(dist.rho) / _integral(dist.lam)


@dataclass(frozen=True)
class CheckProfile:
    """Fractions of parity checks by degree, paired with a code rate."""

    fractions: dict[int, float]
    rate: float
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        fr = _normalized(self.fractions, "check fractions", min_degree=1)
        object.__setattr__(self, "fractions", fr)

    @classmethod
    def regular(cls, right_degree, rate):
        return cls({right_degree: 1.0}, rate)

    @property
    def average_degree(self) -> float:
        return math.fsum(k * f for k, f in self.fractions.items())

    @property
    def max_degree(self) -> int:
        return max(self.fractions)

    def with_rate(self, rate) -> CheckProfile:
        return CheckProfile(self.fractions, rate)


def check_fractions(dist: DegreeDistribution) -> CheckProfile:
    """Node-perspective check fractions d_k = (rho_k / k) / int(rho)."""
    if not dist.rho:
        raise EnsembleFormatError("rho is empty")
    scale = _integral(dist.rho)
    fr = {k: (r / k) / scale for k, r in dist.rho.items()}
    rate = design_rate(dist)
    notes = () if rate > 0 else ("design rate is not positive",)
    return CheckProfile(fr, rate, notes)


def density_from_profile(profile: CheckProfile) -> float:
    """Ones per information bit: ((1 - R) / R) times the average check degree."""
    r = profile.rate
    if not 0.0 < r < 1.0:
        raise ValueError("rate must lie in (0, 1)")
    return (1.0 - r) / r * profile.average_degree
