"""Layer masks: which noise sites receive adversarial noise."""

import re
from typing import List, Tuple

from pydantic import BaseModel, Field, field_validator

from ..core.exceptions import ConfigurationError
from ..nn.network import Network


class LayerMask(BaseModel):
    """Ordered, duplicate-free noise-site indices; index 0 is the input."""

    indices: Tuple[int, ...] = Field(description="Noise site positions")
    label: str = Field(default="", description="Human-readable origin, e.g. top:2")

    @field_validator("indices")
    @classmethod
    def _sorted_unique(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(set(value)) != len(value):
            raise ValueError(f"duplicate mask indices {value}")
        return tuple(sorted(value))

    def sort_key(self) -> Tuple[str, Tuple[int, ...]]:
        return (self.label.split(":")[0], self.indices)


def _site_count(net: Network) -> int:
    return len(net.noise_sites())


def _check_count(net: Network, m: int, what: str) -> int:
    n = _site_count(net)
    if not 0 <= m <= n:
        raise ConfigurationError(f"{what} m={m} outside [0, {n}] noisy layers")
    return n


def layer_mask_top(net: Network, m: int) -> LayerMask:
    """The m shallowest noise sites."""
    _check_count(net, m, "top")
    return LayerMask(indices=tuple(range(m)), label=f"top:{m}")


def layer_mask_bottom(net: Network, m: int) -> LayerMask:
    """The m deepest noise sites."""
    n = _check_count(net, m, "bottom")
    return LayerMask(indices=tuple(range(n - m, n)), label=f"bottom:{m}")


def layer_mask_single(net: Network, m: int) -> LayerMask:
    n = _site_count(net)
    if not 0 <= m < n:
        raise ConfigurationError(f"single layer {m} outside [0, {n - 1}]")
    return LayerMask(indices=(m,), label=f"single:{m}")


def layer_mask_pair(net: Network, base: int, interval: int) -> LayerMask:
    """{base, base + interval}; interval 0 collapses to the single base layer."""
    n = _site_count(net)
    if interval < 0 or not 0 <= base < n or base + interval >= n:
        raise ConfigurationError(
            f"pair base={base}, interval={interval} outside {n} noisy layers"
        )
    return LayerMask(
        indices=tuple(sorted({base, base + interval})),
        label=f"pair:{base}:{interval}",
    )


def validate_mask(net: Network, indices) -> LayerMask:
    n = _site_count(net)
    bad = [m for m in indices if not 0 <= m < n]
    if bad:
        raise ConfigurationError(
            f"Mask indices {bad} are not noisy layers (network has {n}: input plus "
            f"pre-activations feeding a ReLU)"
        )
    try:
        return LayerMask(indices=tuple(indices), label="custom")
    except ValueError as e:
        raise ConfigurationError(str(e))


def default_mask(net: Network) -> LayerMask:
    """Shallow layers only: the top-4 sites (fewer when the network has fewer)."""
    return layer_mask_top(net, min(4, _site_count(net)))


_RANGE = r"(\d+)(?:\.\.(\d+))?"


def _expand(start: str, stop: str | None) -> range:
    first = int(start)
    last = int(stop) if stop is not None else first
    if last < first:
        raise ConfigurationError(f"Empty range {start}..{stop}")
    return range(first, last + 1)


_BUILDERS = {
    "top": layer_mask_top,
    "bottom": layer_mask_bottom,
    "single": layer_mask_single,
}


def parse_mask_spec(net: Network, spec: str) -> List[LayerMask]:
    """
    Expand a sweep description into masks.

    Grammar (comma-separated groups):
        top:A..B   bottom:A..B   single:A..B   pair:BASE:A..B
    where ``A..B`` is an inclusive range (a single number is allowed).
    """
    masks: List[LayerMask] = []
    for group in [g.strip() for g in spec.split(",") if g.strip()]:
        match = re.fullmatch(rf"(top|bottom|single):{_RANGE}", group)
        if match:
            kind, start, stop = match.groups()
            build = _BUILDERS[kind]
            masks.extend(build(net, m) for m in _expand(start, stop))
            continue
        match = re.fullmatch(rf"pair:(\d+):{_RANGE}", group)
        if match:
            base, start, stop = match.groups()
            masks.extend(
                layer_mask_pair(net, int(base), i) for i in _expand(start, stop)
            )
            continue
        raise ConfigurationError(f"Cannot parse mask group {group!r}")
    if not masks:
        raise ConfigurationError(f"Mask spec {spec!r} selects nothing")
    return masks
