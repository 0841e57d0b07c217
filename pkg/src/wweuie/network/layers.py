"""Convolution and normalization primitives on ``(C, H, W)`` feature maps.

All spatial filters use edge-replicate padding and stride 1 unless stated.
"""

import numpy as np

from ..image import bilinear_taps
from . import _kernels

HIN_EPS = 1e-5
LEAKY_SLOPE = 0.2


def _check_channels(x, expected, what):
    if x.shape[0] != expected:
        raise ValueError(f"{what}: input has {x.shape[0]} channels, weights expect {expected}")


def depthwise3x3(x, kernel):
    """Per-channel 3x3 correlation; ``kernel`` has shape (C, 3, 3)."""
    _check_channels(x, kernel.shape[0], "depthwise conv")
    x = np.ascontiguousarray(x)
    return _kernels.depthwise3x3(x, np.ascontiguousarray(kernel, dtype=x.dtype))


def sobel_magnitude(x):
    """Per-channel Sobel gradient magnitude with edge-replicate padding."""
    return _kernels.sobel_magnitude(np.ascontiguousarray(x))


def conv1x1(x, weight, bias=None):
    """Pointwise channel mixing; ``weight`` has shape (C_out, C_in)."""
    _check_channels(x, weight.shape[1], "1x1 conv")
    c, h, w = x.shape
    out = (weight @ x.reshape(c, h * w)).reshape(weight.shape[0], h, w)
    if bias is not None:
        out += bias[:, None, None]
    return out


def conv3x3(x, weight, bias=None):
    """Dense 3x3 convolution; ``weight`` has shape (C_out, C_in, 3, 3)."""
    _check_channels(x, weight.shape[1], "3x3 conv")
    c, h, w = x.shape
    c_out = weight.shape[0]
    if c_out < c:
        # mix channels once per tap, then shift the (few) outputs
        taps = weight.transpose(2, 3, 0, 1).reshape(9 * c_out, c)
        z = (taps @ x.reshape(c, h * w)).reshape(3, 3, c_out, h, w)
        z = np.pad(z, ((0, 0), (0, 0), (0, 0), (1, 1), (1, 1)), mode="edge")
        out = np.zeros((c_out, h, w), dtype=x.dtype)
        for i in range(3):
            for j in range(3):
                out += z[i, j, :, i:i + h, j:j + w]
    else:
        p = np.pad(x, ((0, 0), (1, 1), (1, 1)), mode="edge")
        cols = np.empty((c, 3, 3, h, w), dtype=x.dtype)
        for i in range(3):
            for j in range(3):
                cols[:, i, j] = p[:, i:i + h, j:j + w]
        out = (weight.reshape(c_out, -1) @ cols.reshape(c * 9, h * w)).reshape(c_out, h, w)
    if bias is not None:
        out += bias[:, None, None]
    return out


def conv_down2(x, weight, bias=None):
    """2x2 convolution with stride 2; ``weight`` has shape (C_out, C_in, 2, 2)."""
    _check_channels(x, weight.shape[1], "stride-2 conv")
    c, h, w = x.shape
    if h % 2 or w % 2:
        raise ValueError(f"stride-2 conv needs even sizes, got {h}x{w}")
    blocks = x.reshape(c, h // 2, 2, w // 2, 2).transpose(0, 2, 4, 1, 3)
    out = weight.reshape(weight.shape[0], -1) @ blocks.reshape(c * 4, -1)
    out = out.reshape(-1, h // 2, w // 2)
    if bias is not None:
        out += bias[:, None, None]
    return out


def dws_conv(x, dw, pw, bias):
    """Depthwise-separable convolution: 3x3 depthwise, then 1x1 mixing plus bias."""
    return conv1x1(depthwise3x3(x, dw), pw, bias)


def hin(x, scale, shift, eps=HIN_EPS):
    """Half instance normalization.

    The first C/2 channels are normalized per channel over space (biased
    variance) and affinely transformed; the rest pass through untouched.
    """
    c = x.shape[0]
    if c % 2:
        raise ValueError(f"half instance norm needs an even channel count, got {c}")
    half = c // 2
    if scale.shape != (half,) or shift.shape != (half,):
        raise ValueError(f"affine terms must have shape ({half},)")
    out = np.empty_like(x)
    a = x[:half]
    mu = a.mean(axis=(1, 2), keepdims=True)
    centred = a - mu
    var = np.mean(centred * centred, axis=(1, 2), keepdims=True)
    out[:half] = centred / np.sqrt(var + eps) * scale[:, None, None] + shift[:, None, None]
    out[half:] = x[half:]
    return out


def leaky_relu(x, slope=LEAKY_SLOPE):
    return np.maximum(x, x * x.dtype.type(slope))


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def upsample2x(x, out_h=None, out_w=None):
    """Bilinear x2 upsampling (half-pixel centres) over the last two axes."""
    h, w = x.shape[-2:]
    ty = bilinear_taps(h, out_h or 2 * h, x.dtype)
    tx = bilinear_taps(w, out_w or 2 * w, x.dtype)
    return _kernels.resize_bilinear(np.ascontiguousarray(x), *ty, *tx)
