"""
Robustness metrics.
"""

from .bound import NoiseBoundAudit, layerwise_noise_bound, mlp_weights
from .corruption import (
    CorruptionErrorResult,
    ErrorTable,
    FlipRateResult,
    RelativeMceResult,
    corruption_error,
    error_table,
    flip_probabilities,
    flip_probability,
    flip_probability_from_predictions,
    flip_rates,
    relative_mce,
    scorable,
)
from .report import MetricReport, MetricRow
from .structure import (
    BoundaryDistanceResult,
    MarchDirections,
    HiddenInsensitivityResult,
    InsensitivityResult,
    InsensitivitySample,
    empirical_boundary_distance,
    hidden_insensitivity,
    make_insensitivity_samples,
    noise_insensitivity,
)

__all__ = [
    "BoundaryDistanceResult",
    "MarchDirections",
    "CorruptionErrorResult",
    "ErrorTable",
    "FlipRateResult",
    "HiddenInsensitivityResult",
    "InsensitivityResult",
    "InsensitivitySample",
    "MetricReport",
    "MetricRow",
    "NoiseBoundAudit",
    "RelativeMceResult",
    "corruption_error",
    "empirical_boundary_distance",
    "error_table",
    "flip_probabilities",
    "flip_probability",
    "flip_probability_from_predictions",
    "flip_rates",
    "hidden_insensitivity",
    "layerwise_noise_bound",
    "make_insensitivity_samples",
    "mlp_weights",
    "noise_insensitivity",
    "relative_mce",
    "scorable",
]
