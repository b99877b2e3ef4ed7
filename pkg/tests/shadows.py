"""Loop-based reference kernels the vectorized ones are checked against."""

import numpy as np

from src.nn.layers import Affine
from src.nn.network import Network


def naive_conv2d(x, kernels, bias, stride=1, padding=0):
    n, c_in, h, w = x.shape
    c_out, _, kh, kw = kernels.shape
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    h_out = (h + 2 * padding - kh) // stride + 1
    w_out = (w + 2 * padding - kw) // stride + 1
    out = np.zeros((n, c_out, h_out, w_out))
    for b in range(n):
        for o in range(c_out):
            for i in range(h_out):
                for j in range(w_out):
                    window = xp[
                        b, :, i * stride : i * stride + kh, j * stride : j * stride + kw
                    ]
                    out[b, o, i, j] = np.sum(window * kernels[o]) + bias[o]
    return out


def naive_maxpool2x2(x):
    n, c, h, w = x.shape
    out = np.zeros((n, c, h // 2, w // 2))
    for b in range(n):
        for ch in range(c):
            for i in range(h // 2):
                for j in range(w // 2):
                    window = x[b, ch, 2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
                    out[b, ch, i, j] = window.max()
    return out


def numeric_gradient(f, x, h=1e-6):
    """Central differences of the scalar function ``f`` at ``x``."""
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        saved = flat[i]
        flat[i] = saved + h
        up = f(x)
        flat[i] = saved - h
        down = f(x)
        flat[i] = saved
        out[i] = (up - down) / (2 * h)
    return grad


def linear_net(weight, bias) -> Network:
    """A single affine layer; logits are x W^T + b."""
    weight = np.asarray(weight, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    return Network(
        layers=[Affine(weight=weight, bias=bias)],
        input_shape=(weight.shape[1],),
        class_count=weight.shape[0],
    )
