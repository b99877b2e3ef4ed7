"""Deterministic 2-D toy datasets inside the unit square."""

import numpy as np

from ..core.exceptions import ConfigurationError
from .dataset import Dataset


def _balanced_labels(n: int, classes: int, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(np.arange(n) % classes)


def blob_centers(classes: int) -> np.ndarray:
    """Class centers evenly spaced on a circle of radius 0.3 around (0.5, 0.5)."""
    angles = 2.0 * np.pi * np.arange(classes) / classes
    return 0.5 + 0.3 * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def synth_blobs(
    n: int, classes: int = 2, spread: float = 0.05, seed: int = 0
) -> Dataset:
    """Isotropic Gaussian blobs, class counts balanced within one."""
    if n < 1 or classes < 2 or spread < 0:
        raise ConfigurationError(
            f"Invalid blobs parameters n={n}, classes={classes}, spread={spread}"
        )
    rng = np.random.default_rng(seed)
    labels = _balanced_labels(n, classes, rng)
    points = blob_centers(classes)[labels] + spread * rng.standard_normal((n, 2))
    return Dataset(
        images=np.clip(points, 0.0, 1.0),
        labels=labels,
        name="blobs",
        split="train",
        class_count=classes,
    )


def synth_spirals(n: int, seed: int = 0, noise: float = 0.01) -> Dataset:
    """Two interleaved spirals."""
    if n < 2:
        raise ConfigurationError(f"Spirals need at least 2 points, got {n}")
    rng = np.random.default_rng(seed)
    labels = _balanced_labels(n, 2, rng)
    t = np.sqrt(rng.uniform(0.05, 1.0, size=n)) * 3.0 * np.pi
    phase = np.pi * labels
    radius = t / (3.0 * np.pi) * 0.45
    points = np.stack(
        [0.5 + radius * np.cos(t + phase), 0.5 + radius * np.sin(t + phase)], axis=1
    )
    points += noise * rng.standard_normal(points.shape)
    return Dataset(
        images=np.clip(points, 0.0, 1.0),
        labels=labels,
        name="spirals",
        split="train",
        class_count=2,
    )
