"""Architectures used by the experiments."""

import logging
from typing import Sequence

import numpy as np

from ..core.exceptions import ConfigurationError
from ..core.types import Rng
from .layers import Affine, Conv2D, Flatten, MaxPool2x2, Relu
from .network import Network

logger = logging.getLogger(__name__)


def he_affine(rng: Rng, fan_in: int, fan_out: int) -> Affine:
    weight = rng.standard_normal((fan_out, fan_in)) * np.sqrt(2.0 / fan_in)
    return Affine(weight=weight, bias=np.zeros(fan_out))


def he_conv(
    rng: Rng, c_in: int, c_out: int, size: int, stride: int = 1, padding: int = 0
) -> Conv2D:
    fan_in = c_in * size * size
    kernels = rng.standard_normal((c_out, c_in, size, size)) * np.sqrt(2.0 / fan_in)
    return Conv2D(kernels=kernels, bias=np.zeros(c_out), stride=stride, padding=padding)


def build_lenet_small(
    rng: Rng, input_shape: Sequence[int] = (1, 28, 28), class_count: int = 10
) -> Network:
    """
    Conv(8@5x5) -> ReLU -> Pool -> Conv(16@5x5) -> ReLU -> Pool -> Flatten
    -> FC64 -> ReLU -> FC.
    """
    c, h, w = input_shape
    conv1 = he_conv(rng, c, 8, 5)
    conv2 = he_conv(rng, 8, 16, 5)
    flat = 16 * (((h - 4) // 2 - 4) // 2) * (((w - 4) // 2 - 4) // 2)
    net = Network(
        layers=[
            conv1,
            Relu(),
            MaxPool2x2(),
            conv2,
            Relu(),
            MaxPool2x2(),
            Flatten(),
            he_affine(rng, flat, 64),
            Relu(),
            he_affine(rng, 64, class_count),
        ],
        input_shape=tuple(input_shape),
        class_count=class_count,
    )
    logger.debug(f"Built LeNet-small with {net.parameter_count()} parameters")
    return net


def build_mlp(dims: Sequence[int], rng: Rng) -> Network:
    """Fully connected ReLU stack; ``dims`` = [input, hidden..., classes]."""
    dims = [int(d) for d in dims]
    if len(dims) < 2 or min(dims) < 1:
        raise ConfigurationError(
            f"MLP needs at least input and output sizes, got {dims}"
        )
    layers = []
    for index, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        layers.append(he_affine(rng, fan_in, fan_out))
        if index < len(dims) - 2:
            layers.append(Relu())
    return Network(layers=layers, input_shape=(dims[0],), class_count=dims[-1])


def build_architecture(
    spec: str, input_shape: Sequence[int], class_count: int, rng: Rng
) -> Network:
    """
    ``lenet`` or ``mlp:H1,H2,...`` (hidden widths; input and output sizes come
    from the data).
    """
    name, _, rest = spec.strip().lower().partition(":")
    if name == "lenet":
        if len(input_shape) != 3:
            raise ConfigurationError(
                f"lenet needs (C, H, W) inputs, got {tuple(input_shape)}"
            )
        return build_lenet_small(rng, input_shape, class_count)
    if name == "mlp":
        try:
            hidden = [int(width) for width in rest.split(",") if width.strip()]
        except ValueError:
            raise ConfigurationError(f"Cannot parse MLP widths in {spec!r}")
        net = build_mlp([int(np.prod(input_shape))] + hidden + [class_count], rng)
        if len(input_shape) != 1:
            net = Network(
                layers=[Flatten()] + net.layers,
                input_shape=tuple(input_shape),
                class_count=class_count,
            )
        return net
    raise ConfigurationError(
        f"Unknown architecture {spec!r}; use 'lenet' or 'mlp:W1,W2,...'"
    )
