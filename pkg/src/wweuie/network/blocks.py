"""Network building blocks on ``(C, H, W)`` feature maps.

Each block reads its tensors from a name -> array mapping under a prefix;
the matching ``*_params`` function lists the same names with their shapes.
"""

import numpy as np

from ..image import pad_to_multiple
from ..priors import haar_analysis
from .layers import conv1x1, dws_conv, hin, leaky_relu, sigmoid, sobel_magnitude, upsample2x


def dws_conv_params(prefix, c_in, c_out):
    return [(f"{prefix}.dw", (c_in, 3, 3), "depthwise"),
            (f"{prefix}.pw", (c_out, c_in), "pointwise"),
            (f"{prefix}.bias", (c_out,), "bias")]


def dws_hinb_params(prefix, c):
    return (dws_conv_params(f"{prefix}.conv1", c, c)
            + [(f"{prefix}.norm.scale", (c // 2,), "norm_scale"),
               (f"{prefix}.norm.shift", (c // 2,), "norm_shift")]
            + dws_conv_params(f"{prefix}.conv2", c, c))


def web_params(prefix, c):
    return ([(f"{prefix}.fuse.weight", (c, 4 * c), "pointwise"),
             (f"{prefix}.fuse.bias", (c,), "bias")]
            + dws_hinb_params(f"{prefix}.refine", c))


def sgfb_params(prefix, c, gradient_branch=True):
    params = dws_hinb_params(f"{prefix}.pre", c)
    if gradient_branch:
        params += dws_conv_params(f"{prefix}.gate", c, c)
        params.append((f"{prefix}.alpha", (1,), "alpha"))
    return params + dws_hinb_params(f"{prefix}.post", c)


def wgsrb_params(prefix, c, config):
    params = []
    if config.enable_web:
        params += web_params(f"{prefix}.web", c)
    if config.enable_sgfb:
        params += sgfb_params(f"{prefix}.sgfb", c, config.enable_sgfb_gradient_branch)
    return params


def _dws(x, w, prefix):
    return dws_conv(x, w[f"{prefix}.dw"], w[f"{prefix}.pw"], w[f"{prefix}.bias"])


def dws_hinb(x, w, prefix):
    """dws-conv -> half instance norm -> LeakyReLU(0.2) -> dws-conv, plus the input."""
    y = _dws(x, w, f"{prefix}.conv1")
    y = hin(y, w[f"{prefix}.norm.scale"], w[f"{prefix}.norm.shift"])
    y = leaky_relu(y)
    y = _dws(y, w, f"{prefix}.conv2")
    return x + y


def haar_subbands(f):
    """Channel-stacked Haar subbands ``[LL, LH, HL, HH]`` of an even-sized map."""
    return np.concatenate(haar_analysis(f), axis=0)


def web_forward(f_in, w, prefix):
    """Wavelet enhancement: Haar split, 1x1 fusion, refinement at half
    resolution, bilinear x2 upsampling and a residual connection."""
    c = f_in.shape[0]
    fuse = w[f"{prefix}.fuse.weight"]
    if fuse.shape[1] != 4 * c:
        raise ValueError(f"WEB at {prefix}: input has {c} channels, weights expect {fuse.shape[1] // 4}")
    padded, (h, wd) = pad_to_multiple(f_in, 2, axes=(1, 2))
    fused = conv1x1(haar_subbands(padded), fuse, w[f"{prefix}.fuse.bias"])
    refined = dws_hinb(fused, w, f"{prefix}.refine")
    up = upsample2x(refined)[:, :h, :wd]
    return up + f_in


def sgfb_blend(f0, gate, alpha):
    """``alpha * (gate * f0) + (1 - alpha) * f0``.

    Evaluated as ``f0 * (1 - alpha * (1 - gate))`` so that, with the gate and
    alpha in [0, 1], the factor stays in [0, 1] under rounding too.
    """
    one = np.ones((), dtype=np.result_type(f0, gate))
    return f0 * (one - alpha * (one - gate))


def sgfb_forward(f_in, w, prefix, gradient_branch=True, return_intermediates=False):
    """Sobel gradient fusion: refine, gate by a sigmoid map of the Sobel
    magnitude, blend with the learnable alpha, refine again."""
    f0 = dws_hinb(f_in, w, f"{prefix}.pre")
    gate = None
    if gradient_branch:
        alpha = float(w[f"{prefix}.alpha"][0])
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"{prefix}.alpha must lie in [0, 1], got {alpha}")
        gate = sigmoid(_dws(sobel_magnitude(f0), w, f"{prefix}.gate"))
        f1 = sgfb_blend(f0, gate, np.float32(alpha) if f0.dtype == np.float32 else alpha)
    else:
        f1 = f0
    out = dws_hinb(f1, w, f"{prefix}.post")
    if return_intermediates:
        return out, {"f0": f0, "gate": gate, "f1": f1}
    return out


def wgsrb_forward(f_in, w, prefix, config):
    """WEB and SGFB in the configured order; disabled blocks act as identity."""
    stages = []
    if config.enable_web:
        stages.append(("web", lambda f: web_forward(f, w, f"{prefix}.web")))
    if config.enable_sgfb:
        stages.append(("sgfb", lambda f: sgfb_forward(f, w, f"{prefix}.sgfb",
                                                      config.enable_sgfb_gradient_branch)))
    if config.block_order == "sgfb-web":
        stages.reverse()
    f = f_in
    for _, stage in stages:
        f = stage(f)
    return f
