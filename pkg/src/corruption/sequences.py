"""Frame sequences of gradually increasing corruption intensity."""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..core.exceptions import ConfigurationError, DomainError
from ..core.types import CorruptionKind, Tensor
from .kinds import PROFILES, apply_intensity, sample_field

# sequences ramp up to the severity-3 intensity
RAMP_SEVERITY = 3


class PerturbationSequence(BaseModel):
    """``frames[0]`` is the clean image; frame j uses ``intensities[j]``."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    frames: np.ndarray
    intensities: np.ndarray
    kind: CorruptionKind
    n: int = Field(ge=2)
    label: Optional[int] = None


def _ramp(kind: CorruptionKind, n: int) -> np.ndarray:
    profile = PROFILES[kind]
    return np.linspace(profile.identity, profile.levels[RAMP_SEVERITY - 1], n)


def make_sequence(
    x: Tensor, kind: CorruptionKind, n: int, seed: int, label: Optional[int] = None
) -> PerturbationSequence:
    """
    Ramp the kind's intensity linearly from its identity value to the
    severity-3 value over ``n`` frames. One random field serves every frame,
    so consecutive frames differ only through the intensity step. ``x`` is one
    example without a batch axis.
    """
    if n < 2:
        raise ConfigurationError(f"A perturbation sequence needs n >= 2, got {n}")
    x = np.asarray(x, dtype=np.float64)
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise DomainError("Sequence inputs must lie in [0, 1]")
    intensities = _ramp(kind, n)
    batch = x[None]
    field = sample_field(kind, batch.shape, seed)
    frames = np.concatenate(
        [apply_intensity(batch, kind, float(t), field) for t in intensities]
    )
    return PerturbationSequence(
        frames=frames, intensities=intensities, kind=kind, n=n, label=label
    )


def frame_step_bound(
    x: Tensor, kind: CorruptionKind, n: int, seed: int
) -> Optional[float]:
    """l-inf bound on the change between adjacent frames, when the kind has one."""
    profile = PROFILES[kind]
    if profile.gain is None:
        return None
    batch = np.asarray(x, dtype=np.float64)[None]
    step = float(np.diff(_ramp(kind, n))[0])
    return step * profile.gain(batch, sample_field(kind, batch.shape, seed))
