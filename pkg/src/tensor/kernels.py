"""
Dense kernels with hand-written backward passes.

Convention: NCHW for images, (N, features) for affine inputs. Every kernel
returns the forward value plus whatever its backward needs.
"""

from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..core.exceptions import DomainError
from ..core.types import Tensor


def conv_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    out = (size + 2 * padding - kernel) // stride + 1
    if out < 1:
        raise DomainError(
            f"Kernel {kernel} with stride {stride}, padding {padding} "
            f"does not fit input size {size}"
        )
    return out


def _windows(xp: Tensor, kh: int, kw: int, stride: int) -> Tensor:
    # (N, C, H_out, W_out, kh, kw) view over the padded input
    view = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    return view[:, :, ::stride, ::stride]


def conv2d_forward(
    x: Tensor, kernels: Tensor, bias: Tensor, stride: int = 1, padding: int = 0
) -> Tuple[Tensor, Tensor]:
    """
    2-D cross-correlation.

    Args:
        x: (N, C_in, H, W) input
        kernels: (C_out, C_in, kh, kw) filters
        bias: (C_out,) per-channel bias

    Returns:
        Output (N, C_out, H_out, W_out) and the padded input for backward.
    """
    if x.ndim != 4 or kernels.ndim != 4 or x.shape[1] != kernels.shape[1]:
        raise DomainError(
            f"conv2d shape mismatch: input {x.shape}, kernels {kernels.shape}"
        )
    _, _, kh, kw = kernels.shape
    conv_output_size(x.shape[2], kh, stride, padding)
    conv_output_size(x.shape[3], kw, stride, padding)
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    cols = _windows(xp, kh, kw, stride)
    out = np.tensordot(cols, kernels, axes=([1, 4, 5], [1, 2, 3]))
    out = out.transpose(0, 3, 1, 2) + bias[None, :, None, None]
    return np.ascontiguousarray(out), xp


def conv2d_backward(
    dout: Tensor,
    xp: Tensor,
    kernels: Tensor,
    stride: int = 1,
    padding: int = 0,
    params: bool = True,
) -> Tuple[Tensor, Tensor | None, Tensor | None]:
    """Gradients w.r.t. the unpadded input, the kernels and the bias."""
    _, _, kh, kw = kernels.shape
    h_out, w_out = dout.shape[2], dout.shape[3]

    d_kernels = d_bias = None
    if params:
        cols = _windows(xp, kh, kw, stride)
        d_kernels = np.tensordot(dout, cols, axes=([0, 2, 3], [0, 2, 3]))
        d_bias = dout.sum(axis=(0, 2, 3))

    dxp = np.zeros_like(xp)
    for i in range(kh):
        for j in range(kw):
            contribution = np.tensordot(dout, kernels[:, :, i, j], axes=([1], [0]))
            dxp[
                :,
                :,
                i : i + stride * h_out : stride,
                j : j + stride * w_out : stride,
            ] += contribution.transpose(0, 3, 1, 2)
    h, w = xp.shape[2] - 2 * padding, xp.shape[3] - 2 * padding
    dx = dxp[:, :, padding : padding + h, padding : padding + w]
    return np.ascontiguousarray(dx), d_kernels, d_bias


def maxpool2x2_forward(x: Tensor) -> Tuple[Tensor, Tensor]:
    """2x2 max-pool with stride 2; odd trailing rows/columns are dropped.

    Returns the pooled output and the argmax memo (index 0..3 inside each window).
    """
    if x.ndim != 4 or x.shape[2] < 2 or x.shape[3] < 2:
        raise DomainError(f"maxpool2x2 needs (N, C, H>=2, W>=2), got {x.shape}")
    n, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    blocks = x[:, :, : 2 * h2, : 2 * w2].reshape(n, c, h2, 2, w2, 2)
    blocks = blocks.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h2, w2, 4)
    memo = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, memo[..., None], axis=-1)[..., 0]
    return out, memo


def maxpool2x2_backward(dout: Tensor, memo: Tensor, input_shape: tuple) -> Tensor:
    """Route each upstream gradient to the argmax position of its window."""
    n, c, h, w = input_shape
    h2, w2 = h // 2, w // 2
    routed = np.zeros((n, c, h2, w2, 4), dtype=np.float64)
    np.put_along_axis(routed, memo[..., None], dout[..., None], axis=-1)
    routed = routed.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
    dx = np.zeros(input_shape, dtype=np.float64)
    dx[:, :, : 2 * h2, : 2 * w2] = routed.reshape(n, c, 2 * h2, 2 * w2)
    return dx


def relu(x: Tensor) -> Tensor:
    return np.maximum(x, 0.0)


def relu_backward(dout: Tensor, x: Tensor) -> Tensor:
    # derivative taken as 0 at the kink
    return dout * (x > 0.0)


def softmax(logits: Tensor) -> Tensor:
    """Row-wise softmax, stable against large logits."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def one_hot(labels, class_count: int) -> Tensor:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= class_count):
        raise DomainError(f"Labels must lie in [0, {class_count})")
    encoded = np.zeros((labels.shape[0], class_count), dtype=np.float64)
    encoded[np.arange(labels.shape[0]), labels] = 1.0
    return encoded
