"""Layer kinds with explicit forward and backward passes."""

from dataclasses import dataclass
from typing import Any, ClassVar, Dict, Tuple

import numpy as np

from ..core.exceptions import DomainError
from ..core.types import Tensor
from ..tensor.kernels import (
    conv2d_backward,
    conv2d_forward,
    conv_output_size,
    maxpool2x2_backward,
    maxpool2x2_forward,
    relu,
    relu_backward,
)

Shape = Tuple[int, ...]
Grads = Dict[str, Tensor]


class Layer:
    """Base class; ``forward`` returns (output, cache) for ``backward``."""

    kind: ClassVar[str] = "layer"
    parametric: ClassVar[bool] = False

    def output_shape(self, input_shape: Shape) -> Shape:
        return input_shape

    def forward(self, x: Tensor) -> Tuple[Tensor, Any]:
        raise NotImplementedError

    def backward(
        self, dout: Tensor, cache: Any, params: bool = True
    ) -> Tuple[Tensor, Grads]:
        raise NotImplementedError

    def parameters(self) -> Dict[str, Tensor]:
        return {}


@dataclass(eq=False)
class Affine(Layer):
    """y = x W^T + b with W shaped (out, in)."""

    weight: Tensor
    bias: Tensor
    kind: ClassVar[str] = "affine"
    parametric: ClassVar[bool] = True

    def __post_init__(self):
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise DomainError(
                f"Affine parameters inconsistent: weight {self.weight.shape}, "
                f"bias {self.bias.shape}"
            )

    def output_shape(self, input_shape: Shape) -> Shape:
        if input_shape != (self.weight.shape[1],):
            raise DomainError(
                f"Affine expects input shape ({self.weight.shape[1]},), "
                f"got {input_shape}"
            )
        return (self.weight.shape[0],)

    def forward(self, x: Tensor) -> Tuple[Tensor, Any]:
        return x @ self.weight.T + self.bias, x

    def backward(
        self, dout: Tensor, cache: Any, params: bool = True
    ) -> Tuple[Tensor, Grads]:
        x = cache
        grads = {}
        if params:
            grads = {"weight": dout.T @ x, "bias": dout.sum(axis=0)}
        return dout @ self.weight, grads

    def parameters(self) -> Dict[str, Tensor]:
        return {"weight": self.weight, "bias": self.bias}


@dataclass(eq=False)
class Conv2D(Layer):
    """Cross-correlation with kernels shaped (C_out, C_in, kh, kw)."""

    kernels: Tensor
    bias: Tensor
    stride: int = 1
    padding: int = 0
    kind: ClassVar[str] = "conv2d"
    parametric: ClassVar[bool] = True

    def __post_init__(self):
        if self.kernels.ndim != 4 or self.bias.shape != (self.kernels.shape[0],):
            raise DomainError(
                f"Conv2D parameters inconsistent: kernels {self.kernels.shape}, "
                f"bias {self.bias.shape}"
            )
        if self.stride < 1 or self.padding < 0:
            raise DomainError(f"Invalid stride {self.stride} / padding {self.padding}")

    def output_shape(self, input_shape: Shape) -> Shape:
        c_out, c_in, kh, kw = self.kernels.shape
        if len(input_shape) != 3 or input_shape[0] != c_in:
            raise DomainError(f"Conv2D expects ({c_in}, H, W), got {input_shape}")
        return (
            c_out,
            conv_output_size(input_shape[1], kh, self.stride, self.padding),
            conv_output_size(input_shape[2], kw, self.stride, self.padding),
        )

    def forward(self, x: Tensor) -> Tuple[Tensor, Any]:
        return conv2d_forward(x, self.kernels, self.bias, self.stride, self.padding)

    def backward(
        self, dout: Tensor, cache: Any, params: bool = True
    ) -> Tuple[Tensor, Grads]:
        dx, d_kernels, d_bias = conv2d_backward(
            dout, cache, self.kernels, self.stride, self.padding, params
        )
        grads = {"kernels": d_kernels, "bias": d_bias} if params else {}
        return dx, grads

    def parameters(self) -> Dict[str, Tensor]:
        return {"kernels": self.kernels, "bias": self.bias}


@dataclass(eq=False)
class MaxPool2x2(Layer):
    kind: ClassVar[str] = "maxpool2x2"

    def output_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 3 or input_shape[1] < 2 or input_shape[2] < 2:
            raise DomainError(f"MaxPool2x2 expects (C, H>=2, W>=2), got {input_shape}")
        return (input_shape[0], input_shape[1] // 2, input_shape[2] // 2)

    def forward(self, x: Tensor) -> Tuple[Tensor, Any]:
        out, memo = maxpool2x2_forward(x)
        return out, (memo, x.shape)

    def backward(
        self, dout: Tensor, cache: Any, params: bool = True
    ) -> Tuple[Tensor, Grads]:
        memo, shape = cache
        return maxpool2x2_backward(dout, memo, shape), {}


@dataclass(eq=False)
class Relu(Layer):
    kind: ClassVar[str] = "relu"

    def forward(self, x: Tensor) -> Tuple[Tensor, Any]:
        return relu(x), x

    def backward(
        self, dout: Tensor, cache: Any, params: bool = True
    ) -> Tuple[Tensor, Grads]:
        return relu_backward(dout, cache), {}


@dataclass(eq=False)
class Flatten(Layer):
    kind: ClassVar[str] = "flatten"

    def output_shape(self, input_shape: Shape) -> Shape:
        return (int(np.prod(input_shape)),)

    def forward(self, x: Tensor) -> Tuple[Tensor, Any]:
        return x.reshape(x.shape[0], -1), x.shape

    def backward(
        self, dout: Tensor, cache: Any, params: bool = True
    ) -> Tuple[Tensor, Grads]:
        return dout.reshape(cache), {}
