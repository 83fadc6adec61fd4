"""Converse bounds on rate and parity-check density for binary linear codes
over memoryless binary-input output-symmetric channels.

The bounds come in three flavours by how much of the channel LLR they use:
its sign (2-level), a symmetric 2^d-level quantization, or the full
distribution. ``thresholds`` turns rate bounds into Eb/N0 thresholds for
LDPC ensembles.
"""
__version__ = "0.1.0"

from .bounds import (
    BoundResult, Diagnostics, SeriesConfig, binary_entropy, density_bound, density_lb_quantized,
    density_lb_two_level, density_lb_unquantized, entropy_lb_quantized, entropy_lb_unquantized,
    parse_method, rate_bound, rate_ub_quantized, rate_ub_two_level, rate_ub_unquantized,
)
from .channels import (
    ChannelModel, LlrDistribution, Quadrature, capacity, hard_decision_w, llr_distribution,
    moment_m,
)
from .ensembles import CheckProfile, DegreeDistribution, check_fractions, design_rate, load_ensemble
from .quantizer import (
    BinProbabilities, QuantizationScheme, bin_probabilities, optimize_levels_density,
    optimize_levels_rate,
)
from .thresholds import SweepSpec, ThresholdQuery, capacity_limit, sweep, threshold

__all__ = [
    "BinProbabilities", "BoundResult", "ChannelModel", "CheckProfile", "DegreeDistribution",
    "Diagnostics", "LlrDistribution", "QuantizationScheme", "Quadrature", "SeriesConfig",
    "SweepSpec", "ThresholdQuery", "bin_probabilities", "binary_entropy", "capacity",
    "capacity_limit", "check_fractions", "density_bound", "density_lb_quantized",
    "density_lb_two_level", "density_lb_unquantized", "design_rate", "entropy_lb_quantized",
    "entropy_lb_unquantized", "hard_decision_w", "llr_distribution", "load_ensemble", "moment_m",
    "optimize_levels_density", "optimize_levels_rate", "parse_method", "rate_bound",
    "rate_ub_quantized", "rate_ub_two_level", "rate_ub_unquantized", "sweep", "threshold",
]
