"""Norms, normalization and ball projection on float64 tensors."""

from typing import Union

import numpy as np

from ..core.exceptions import ConfigurationError, DomainError, NumericError
from ..core.types import TAU_ZERO, NormOrder, Tensor

NormLike = Union[NormOrder, str, int, float]


def parse_norm(p: NormLike) -> float:
    """
    Normalize a norm-order spelling to 1.0, 2.0 or inf.

    Accepts ``NormOrder`` members, the strings "1", "2", "inf"/"linf", and the
    numbers 1, 2, ``np.inf``.
    """
    if isinstance(p, NormOrder):
        return p.value_p
    if isinstance(p, str):
        key = p.strip().lower()
        if key in ("inf", "linf", "∞"):
            return np.inf
        try:
            p = float(key)
        except ValueError:
            raise ConfigurationError(f"Unsupported norm order: {p!r}")
    if p in (1, 2) or p == np.inf:
        return float(p)
    raise ConfigurationError(f"Unsupported norm order: {p!r}")


def as_tensor(values, check_finite: bool = True) -> Tensor:
    """Copy ``values`` into a contiguous float64 array."""
    t = np.array(values, dtype=np.float64, order="C")
    if check_finite and not np.all(np.isfinite(t)):
        raise NumericError("Tensor contains NaN or Inf entries")
    return t


def lp_norm(t: Tensor, p: NormLike) -> float:
    """(sum |t_i|^p)^(1/p) for p in {1, 2}; max |t_i| for p = inf."""
    t = np.asarray(t, dtype=np.float64)
    if t.size == 0:
        raise DomainError("lp_norm of an empty tensor")
    order = parse_norm(p)
    flat = np.abs(t.ravel())
    if order == np.inf:
        return float(flat.max())
    if order == 1.0:
        return float(flat.sum())
    return float(np.sqrt(np.dot(flat, flat)))


def lp_norm_batch(t: Tensor, p: NormLike) -> Tensor:
    """Per-example lp norms over all but the leading axis."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim == 0 or t.shape[0] == 0 or t[0].size == 0:
        raise DomainError("lp_norm_batch needs a non-empty batch")
    order = parse_norm(p)
    flat = np.abs(t.reshape(t.shape[0], -1))
    if order == np.inf:
        return flat.max(axis=1)
    if order == 1.0:
        return flat.sum(axis=1)
    return np.sqrt(np.einsum("ij,ij->i", flat, flat))


def normalize_lp(t: Tensor, p: NormLike) -> Tensor:
    """t / ||t||_p, or zeros when the norm is below TAU_ZERO."""
    t = np.asarray(t, dtype=np.float64)
    if t.size == 0:
        return np.zeros_like(t)
    norm = lp_norm(t, p)
    if norm < TAU_ZERO:
        return np.zeros_like(t)
    return t / norm


def normalize_lp_batch(t: Tensor, p: NormLike) -> Tensor:
    """Normalize every example slice of ``t`` by its own lp norm."""
    t = np.asarray(t, dtype=np.float64)
    norms = lp_norm_batch(t, p)
    safe = np.where(norms < TAU_ZERO, 1.0, norms)
    scaled = t / safe.reshape((-1,) + (1,) * (t.ndim - 1))
    scaled[norms < TAU_ZERO] = 0.0
    return scaled


def clip_to_linf_ball(
    x: Tensor, center: Tensor, eps: float, lo: float = 0.0, hi: float = 1.0
) -> Tensor:
    """Project ``x`` onto [center - eps, center + eps] intersected with [lo, hi]."""
    x = np.asarray(x, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    if x.shape != center.shape:
        raise DomainError(f"Shape mismatch: {x.shape} vs center {center.shape}")
    if eps < 0:
        raise DomainError(f"Ball radius must be non-negative, got {eps}")
    if lo > hi:
        raise DomainError(f"Empty box: lo={lo} > hi={hi}")
    lower = np.maximum(center - eps, lo)
    upper = np.minimum(center + eps, hi)
    # a center outside [lo, hi] collapses the interval onto the box edge
    upper = np.maximum(upper, lower)
    return np.minimum(np.maximum(x, lower), upper)
