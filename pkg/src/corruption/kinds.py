"""Common corruptions with continuous intensities and fixed severity tables."""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, Field, field_validator

from ..core.exceptions import ConfigurationError, DomainError
from ..core.seeding import derive_rng
from ..core.types import CorruptionKind, Rng, Tensor
from ..data.dataset import Dataset

logger = logging.getLogger(__name__)

SEVERITIES = (1, 2, 3, 4, 5)

NoiseField = Any


@dataclass(frozen=True)
class KindProfile:
    """
    How one corruption kind maps an intensity onto an image.

    ``identity`` is the intensity that returns the input unchanged; ``levels``
    are the intensities of severities 1..5. ``sample`` draws the random field
    the kind needs (None for deterministic kinds), so one field can be reused
    across intensities. ``gain`` bounds the l-inf output change per unit of
    intensity for a given image and field, when such a bound exists.
    """

    identity: float
    levels: Tuple[float, float, float, float, float]
    apply: Callable[[Tensor, float, NoiseField], Tensor]
    sample: Optional[Callable[[Rng, tuple], NoiseField]] = None
    gain: Optional[Callable[[Tensor, NoiseField], float]] = None
    spatial: bool = False


def _example_axes(x: Tensor) -> tuple:
    """Every axis but the leading batch axis; a 1-D input is one example."""
    return tuple(range(1, x.ndim)) if x.ndim > 1 else (0,)


def _require_spatial(x: Tensor):
    if x.ndim < 3:
        raise DomainError(
            f"Spatial corruption needs (N, ..., H, W) batches, got shape {x.shape}"
        )


def _box_weights(half_width: float) -> np.ndarray:
    """Box of continuous half-width; the outermost taps carry the fraction."""
    whole = int(np.floor(half_width))
    fraction = half_width - whole
    weights = np.ones(2 * whole + 3)
    weights[0] = weights[-1] = fraction
    return weights / weights.sum()


def _filter_axis(x: Tensor, weights: np.ndarray, axis: int) -> Tensor:
    pad = len(weights) // 2
    widths = [(0, 0)] * x.ndim
    widths[axis] = (pad, pad)
    padded = np.pad(x, widths, mode="edge")
    return sliding_window_view(padded, len(weights), axis=axis) @ weights


def _gaussian(x: Tensor, sigma: float, z: np.ndarray) -> Tensor:
    return np.clip(x + sigma * z, 0.0, 1.0)


def _shot(x: Tensor, inverse_rate: float, z: np.ndarray) -> Tensor:
    # Poisson(x / t) * t in its signal-dependent Gaussian form
    return np.clip(x + np.sqrt(x * inverse_rate) * z, 0.0, 1.0)


def _impulse(x: Tensor, amount: float, field: Tuple[np.ndarray, np.ndarray]) -> Tensor:
    u, salt = field
    return np.where(u < amount, salt, x)


def _box_blur(x: Tensor, radius: float, _: None) -> Tensor:
    _require_spatial(x)
    weights = _box_weights(radius)
    return _filter_axis(_filter_axis(x, weights, x.ndim - 2), weights, x.ndim - 1)


def _motion_blur(x: Tensor, length: float, _: None) -> Tensor:
    _require_spatial(x)
    return _filter_axis(x, _box_weights(length / 2.0), x.ndim - 1)


def _brightness(x: Tensor, delta: float, _: None) -> Tensor:
    return np.clip(x + delta, 0.0, 1.0)


def _contrast(x: Tensor, reduction: float, _: None) -> Tensor:
    mean = x.mean(axis=_example_axes(x), keepdims=True)
    return np.clip((x - mean) * (1.0 - reduction) + mean, 0.0, 1.0)


def _contrast_gain(x: Tensor, _: None) -> float:
    if not x.size:
        return 0.0
    return float(np.abs(x - x.mean(axis=_example_axes(x), keepdims=True)).max())


def _pixelate(x: Tensor, block: float, _: None) -> Tensor:
    """Block means over b x b tiles (edge tiles may be smaller), repeated back."""
    _require_spatial(x)
    size = max(int(round(block)), 1)
    if size == 1:
        return x.copy()
    h, w = x.shape[-2:]
    out = np.empty_like(x)
    for top in range(0, h, size):
        for left in range(0, w, size):
            tile = (..., slice(top, top + size), slice(left, left + size))
            out[tile] = x[tile].mean(axis=(-2, -1), keepdims=True)
    return out


def _normal_field(rng: Rng, shape: tuple) -> np.ndarray:
    return rng.standard_normal(shape)


def _impulse_field(rng: Rng, shape: tuple) -> Tuple[np.ndarray, np.ndarray]:
    return rng.random(shape), (rng.random(shape) < 0.5).astype(np.float64)


PROFILES: Dict[CorruptionKind, KindProfile] = {
    CorruptionKind.GAUSSIAN_NOISE: KindProfile(
        identity=0.0,
        levels=(0.16, 0.24, 0.32, 0.36, 0.40),
        apply=_gaussian,
        sample=_normal_field,
        gain=lambda x, z: float(np.abs(z).max()) if z.size else 0.0,
    ),
    CorruptionKind.SHOT_NOISE: KindProfile(
        identity=0.0,
        levels=(1 / 30, 1 / 15, 1 / 8, 1 / 5, 1 / 3),
        apply=_shot,
        sample=_normal_field,
    ),
    CorruptionKind.IMPULSE_NOISE: KindProfile(
        identity=0.0,
        levels=(0.03, 0.06, 0.09, 0.17, 0.27),
        apply=_impulse,
        sample=_impulse_field,
    ),
    CorruptionKind.BOX_BLUR: KindProfile(
        identity=0.0,
        levels=(0.5, 1.0, 1.5, 2.0, 2.5),
        apply=_box_blur,
        spatial=True,
    ),
    CorruptionKind.MOTION_BLUR: KindProfile(
        identity=0.0,
        levels=(1.0, 2.0, 3.0, 4.0, 5.0),
        apply=_motion_blur,
        spatial=True,
    ),
    CorruptionKind.BRIGHTNESS: KindProfile(
        identity=0.0,
        levels=(0.05, 0.1, 0.2, 0.3, 0.4),
        apply=_brightness,
        gain=lambda x, _: 1.0,
    ),
    CorruptionKind.CONTRAST: KindProfile(
        identity=0.0,
        levels=(0.3, 0.45, 0.6, 0.75, 0.85),
        apply=_contrast,
        gain=_contrast_gain,
    ),
    CorruptionKind.PIXELATE: KindProfile(
        identity=1.0,
        levels=(2.0, 3.0, 4.0, 5.0, 7.0),
        apply=_pixelate,
        spatial=True,
    ),
}


def _check_severity(severity: int) -> int:
    if severity not in SEVERITIES:
        raise ConfigurationError(
            f"Severity must be one of {SEVERITIES}, got {severity}"
        )
    return severity


def severity_level(kind: CorruptionKind, severity: int) -> float:
    return PROFILES[kind].levels[_check_severity(severity) - 1]


def sample_field(kind: CorruptionKind, shape: tuple, seed: int) -> NoiseField:
    profile = PROFILES[kind]
    if profile.sample is None:
        return None
    return profile.sample(derive_rng(seed, "corruption"), shape)


def apply_intensity(
    x: Tensor, kind: CorruptionKind, intensity: float, field: NoiseField = None
) -> Tensor:
    """Corrupt ``x`` at any intensity; the identity intensity returns a copy."""
    profile = PROFILES[kind]
    if intensity == profile.identity:
        return np.array(x, dtype=np.float64, copy=True)
    return profile.apply(np.asarray(x, dtype=np.float64), intensity, field)


class CorruptionSpec(BaseModel):
    """One corruption kind at one severity, with the seed of its random field."""

    kind: CorruptionKind
    severity: int = Field(description="1 (mild) .. 5 (strong)")
    seed: int = Field(default=0, ge=0)

    @field_validator("severity")
    @classmethod
    def _severity_in_table(cls, value: int) -> int:
        return _check_severity(value)

    @property
    def level(self) -> float:
        return severity_level(self.kind, self.severity)

    @property
    def key(self) -> Tuple[str, int]:
        return (self.kind.value, self.severity)


def corrupt(x: Tensor, spec: CorruptionSpec) -> Tensor:
    """
    Apply ``spec`` to a batch in [0, 1]. The leading axis indexes examples;
    deterministic kinds corrupt each example independently of its batch.

    The random field is drawn for the full shape of ``x`` from ``spec.seed``,
    so (x, spec) fully determines the output.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise DomainError("Corruption inputs must lie in [0, 1]")
    field = sample_field(spec.kind, x.shape, spec.seed)
    return apply_intensity(x, spec.kind, spec.level, field)


def all_specs(
    seed: int = 0, kinds: Optional[List[CorruptionKind]] = None
) -> List[CorruptionSpec]:
    """Every (kind, severity) pair, kinds in declaration order."""
    return [
        CorruptionSpec(kind=kind, severity=severity, seed=seed)
        for kind in (kinds or list(CorruptionKind))
        for severity in SEVERITIES
    ]


def corrupt_dataset(dataset: Dataset, spec: CorruptionSpec) -> Dataset:
    corrupted = corrupt(dataset.images, spec)
    logger.debug(f"Corrupted {len(dataset)} images: {spec.kind.value}@{spec.severity}")
    return Dataset(
        images=corrupted,
        labels=dataset.labels.copy(),
        name=dataset.name,
        split=f"{dataset.split}-{spec.kind.value}-{spec.severity}",
        class_count=dataset.class_count,
    )
