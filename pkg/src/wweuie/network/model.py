"""The full enhancement network: white-balance front end and a U-Net of
wavelet/gradient residual blocks."""

import numpy as np

from ..image import pad_to_multiple
from ..priors import fuse_wb, white_balance
from ..validation import check_image
from .blocks import wgsrb_forward, wgsrb_params
from .layers import conv1x1, conv3x3, conv_down2, upsample2x


def param_shapes(config):
    """Every learnable tensor of ``config`` as ``(name, shape, kind)`` in a fixed order."""
    c0 = config.base_channels
    params = []
    if config.enable_wb_prior:
        params.append(("wb.gamma", (3,), "gamma"))
    params += [("stem.weight", (c0, 3, 3, 3), "dense"), ("stem.bias", (c0,), "bias")]
    for i in range(config.num_scales):
        c, c_next = config.channels(i), config.channels(i + 1)
        params += wgsrb_params(f"enc{i}.block", c, config)
        params += [(f"enc{i}.down.weight", (c_next, c, 2, 2), "dense"),
                   (f"enc{i}.down.bias", (c_next,), "bias")]
    params += wgsrb_params("bottleneck", config.channels(config.num_scales), config)
    for i in reversed(range(config.num_scales)):
        c, c_next = config.channels(i), config.channels(i + 1)
        params += [(f"dec{i}.up.weight", (c, c_next), "pointwise"),
                   (f"dec{i}.up.bias", (c,), "bias"),
                   (f"dec{i}.fuse.weight", (c, 2 * c), "pointwise"),
                   (f"dec{i}.fuse.bias", (c,), "bias")]
        params += wgsrb_params(f"dec{i}.block", c, config)
    params += [("head.weight", (3, c0, 3, 3), "dense"), ("head.bias", (3,), "bias")]
    return params


def fused_input(x, store):
    """Blend of the raw input and its white-balanced version (or the raw input
    when the prior is disabled)."""
    if not store.config.enable_wb_prior:
        return x.copy()
    return fuse_wb(x, white_balance(x), store.tensors["wb.gamma"].astype(np.float64))


def model_forward(x, store):
    """Enhance one ``(H, W, 3)`` image; the output has the input's size and lies in [0, 1].

    Inputs whose sides are not multiples of ``2 ** num_scales`` are
    edge-padded and the result is cropped back.
    """
    x = check_image(x, channels=3, min_size=2)
    config = store.config
    w = store.tensors
    fused = fused_input(x, store)

    padded, (h, wd) = pad_to_multiple(fused, 2 ** config.num_scales)
    f = np.ascontiguousarray(np.moveaxis(padded, -1, 0), dtype=np.float32)
    f = conv3x3(f, w["stem.weight"], w["stem.bias"])
    skips = []
    for i in range(config.num_scales):
        f = wgsrb_forward(f, w, f"enc{i}.block", config)
        skips.append(f)
        f = conv_down2(f, w[f"enc{i}.down.weight"], w[f"enc{i}.down.bias"])
    f = wgsrb_forward(f, w, "bottleneck", config)
    for i in reversed(range(config.num_scales)):
        f = conv1x1(upsample2x(f), w[f"dec{i}.up.weight"], w[f"dec{i}.up.bias"])
        f = conv1x1(np.concatenate([f, skips[i]], axis=0), w[f"dec{i}.fuse.weight"], w[f"dec{i}.fuse.bias"])
        f = wgsrb_forward(f, w, f"dec{i}.block", config)
    residual = conv3x3(f, w["head.weight"], w["head.bias"])[:, :h, :wd]
    out = fused + np.moveaxis(residual, 0, -1).astype(np.float64)
    return np.clip(out, 0.0, 1.0)
