"""
Neural network core: layers, networks, noise registers and traces.
"""

from .builders import build_architecture, build_lenet_small, build_mlp
from .layers import Affine, Conv2D, Flatten, Layer, MaxPool2x2, Relu
from .network import (
    BackwardTrace,
    ForwardTrace,
    Network,
    NoiseRegister,
    backpropagate,
    backward,
    cross_entropy_gradient,
    cross_entropy_loss,
    evaluate,
    forward,
    per_example_loss,
)

__all__ = [
    "Affine",
    "BackwardTrace",
    "Conv2D",
    "Flatten",
    "ForwardTrace",
    "Layer",
    "MaxPool2x2",
    "Network",
    "NoiseRegister",
    "Relu",
    "backpropagate",
    "backward",
    "build_architecture",
    "build_lenet_small",
    "build_mlp",
    "cross_entropy_gradient",
    "cross_entropy_loss",
    "evaluate",
    "forward",
    "per_example_loss",
]
