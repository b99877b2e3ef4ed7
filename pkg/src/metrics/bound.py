"""Numerical audit of the layer-wise perturbation bound for ReLU MLPs."""

import logging
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel, Field

from ..core.exceptions import DomainError, UnsupportedArchitectureError
from ..core.types import Tensor
from ..nn.layers import Affine, Relu
from ..nn.network import Network

logger = logging.getLogger(__name__)


class NoiseBoundAudit(BaseModel):
    lhs: float = Field(description="||F_noisy(x) - F(x)||_2")
    rhs: float = Field(description="sum_l (prod_{j>l} ||W_j||_2) ||W_l eps_l 1||_2")
    literal_rhs: float = Field(
        description="sum_l ||W_L ... W_l eps_l 1||_2, without the ReLUs"
    )
    holds: bool


def mlp_weights(net: Network) -> List[Affine]:
    """Affine layers of an Affine (ReLU Affine)* stack; anything else is unsupported."""
    layers = net.layers
    shape_ok = len(layers) % 2 == 1 and all(
        isinstance(layer, Affine) if i % 2 == 0 else isinstance(layer, Relu)
        for i, layer in enumerate(layers)
    )
    if not shape_ok:
        raise UnsupportedArchitectureError(
            "The perturbation bound audit needs a pure Affine/ReLU MLP, got "
            + " -> ".join(layer.kind for layer in layers)
        )
    return [layer for layer in layers if isinstance(layer, Affine)]


def _run(affines: Sequence[Affine], x: Tensor, noise: Sequence[float]) -> Tensor:
    h = x
    for l, layer in enumerate(affines):
        h = (h + noise[l]) @ layer.weight.T + layer.bias
        if l < len(affines) - 1:
            h = np.maximum(h, 0.0)
    return h


def layerwise_noise_bound(
    net: Network, noise: Sequence[float], x: Tensor
) -> NoiseBoundAudit:
    """
    Compare the output deviation caused by adding the constant vector
    eps_l * 1 to the input of every affine layer l against the bound.

    Args:
        net: Affine/ReLU MLP
        noise: One scalar eps_l per affine layer
        x: Single input vector (or a batch of one)
    """
    affines = mlp_weights(net)
    if len(noise) != len(affines):
        raise DomainError(f"Expected {len(affines)} noise scalars, got {len(noise)}")
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    clean = _run(affines, x, [0.0] * len(affines))
    lhs = float(np.linalg.norm(_run(affines, x, noise) - clean))

    norms = [float(np.linalg.norm(layer.weight, 2)) for layer in affines]
    rhs = 0.0
    literal = 0.0
    for l, layer in enumerate(affines):
        pushed = layer.weight @ np.full(layer.weight.shape[1], float(noise[l]))
        rhs += float(np.prod(norms[l + 1 :])) * float(np.linalg.norm(pushed))
        for later in affines[l + 1 :]:
            pushed = later.weight @ pushed
        literal += float(np.linalg.norm(pushed))
    holds = lhs <= rhs + 1e-9
    if not holds:
        logger.warning(f"Bound violated: lhs {lhs} > rhs {rhs}")
    return NoiseBoundAudit(lhs=lhs, rhs=rhs, literal_rhs=literal, holds=holds)
