"""
Tensor module initialization.
"""

from .kernels import (
    conv2d_backward,
    conv2d_forward,
    conv_output_size,
    maxpool2x2_backward,
    maxpool2x2_forward,
    one_hot,
    relu,
    relu_backward,
    softmax,
)
from .ops import (
    as_tensor,
    clip_to_linf_ball,
    lp_norm,
    lp_norm_batch,
    normalize_lp,
    normalize_lp_batch,
    parse_norm,
)

__all__ = [
    "as_tensor",
    "clip_to_linf_ball",
    "conv2d_backward",
    "conv2d_forward",
    "conv_output_size",
    "lp_norm",
    "lp_norm_batch",
    "maxpool2x2_backward",
    "maxpool2x2_forward",
    "normalize_lp",
    "normalize_lp_batch",
    "one_hot",
    "parse_norm",
    "relu",
    "relu_backward",
    "softmax",
]
