"""
Common corruptions and perturbation sequences.
"""

from .kinds import (
    PROFILES,
    SEVERITIES,
    CorruptionSpec,
    all_specs,
    apply_intensity,
    corrupt,
    corrupt_dataset,
    severity_level,
)
from .sequences import PerturbationSequence, frame_step_bound, make_sequence

__all__ = [
    "PROFILES",
    "SEVERITIES",
    "CorruptionSpec",
    "PerturbationSequence",
    "all_specs",
    "apply_intensity",
    "corrupt",
    "corrupt_dataset",
    "frame_step_bound",
    "make_sequence",
    "severity_level",
]
