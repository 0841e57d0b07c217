"""Parameter and FLOP accounting.

FLOPs are 2 x multiply-accumulates for every convolution, fixed Haar and
Sobel filters included, plus per-element counts for the remaining operations
(:data:`ELEMENTWISE`). The walk mirrors :func:`model_forward` shape for shape.
"""

from dataclasses import dataclass, field

from .model import param_shapes

# flops per output element
ELEMENTWISE = {
    "bias": 1,
    "add": 1,
    "leaky_relu": 1,
    "hin": 6,        # mean, squared deviation, subtract, scale by 1/std, affine scale, shift
    "sigmoid": 4,
    "blend": 4,      # f * (1 - alpha * (1 - m))
    "magnitude": 4,  # two squares, one add, one sqrt
    "bilinear": 7,   # four taps: 4 mul + 3 add
    "white_balance": 10,
    "fuse": 3,
    "clamp": 1,
}


def conv_flops(kind, h, w, c_in, c_out=None, k=3, stride=1):
    """Closed-form FLOPs (2 x MACs) of one convolution without its bias."""
    ho, wo = h // stride, w // stride
    if kind == "dense":
        return 2 * ho * wo * c_in * c_out * k * k
    if kind == "depthwise":
        return 2 * ho * wo * c_in * k * k
    if kind == "pointwise":
        return 2 * ho * wo * c_in * c_out
    raise ValueError(f"unknown convolution kind {kind!r}")


def conv_params(kind, c_in, c_out=None, k=3, bias=True):
    if kind == "dense":
        n = c_in * c_out * k * k
    elif kind == "depthwise":
        n = c_in * k * k
    elif kind == "pointwise":
        n = c_in * c_out
    else:
        raise ValueError(f"unknown convolution kind {kind!r}")
    return n + (c_out if bias and c_out else 0)


@dataclass
class CostReport:
    parameter_count: int
    flop_count: int
    input_size: tuple
    breakdown: dict = field(default_factory=dict)
    convention: str = "FLOPs = 2 x MACs, elementwise ops included"

    def summary(self):
        h, w = self.input_size
        return (f"params {self.parameter_count} ({self.parameter_count / 1e6:.3f} M), "
                f"FLOPs {self.flop_count} ({self.flop_count / 1e9:.3f} G) at {h}x{w}")


class _Counter:
    def __init__(self):
        self.by = {"conv": 0, "fixed_filters": 0, "elementwise": 0}

    def conv(self, *args, **kw):
        self.by["conv"] += conv_flops(*args, **kw)

    def fixed(self, n):
        self.by["fixed_filters"] += n

    def elem(self, op, n):
        self.by["elementwise"] += ELEMENTWISE[op] * n


def _dws(cnt, h, w, c_in, c_out):
    cnt.conv("depthwise", h, w, c_in)
    cnt.conv("pointwise", h, w, c_in, c_out)
    cnt.elem("bias", h * w * c_out)


def _dws_hinb(cnt, h, w, c):
    _dws(cnt, h, w, c, c)
    cnt.elem("hin", h * w * (c // 2))
    cnt.elem("leaky_relu", h * w * c)
    _dws(cnt, h, w, c, c)
    cnt.elem("add", h * w * c)


def _web(cnt, h, w, c):
    hp, wp = h + h % 2, w + w % 2
    hh, wh = hp // 2, wp // 2
    cnt.fixed(4 * conv_flops("depthwise", hp, wp, c, k=2, stride=2))
    cnt.conv("pointwise", hh, wh, 4 * c, c)
    cnt.elem("bias", hh * wh * c)
    _dws_hinb(cnt, hh, wh, c)
    cnt.elem("bilinear", hp * wp * c)
    cnt.elem("add", h * w * c)


def _sgfb(cnt, h, w, c, gradient_branch):
    _dws_hinb(cnt, h, w, c)
    if gradient_branch:
        cnt.fixed(2 * conv_flops("depthwise", h, w, c, k=3))
        cnt.elem("magnitude", h * w * c)
        _dws(cnt, h, w, c, c)
        cnt.elem("sigmoid", h * w * c)
        cnt.elem("blend", h * w * c)
    _dws_hinb(cnt, h, w, c)


def _wgsrb(cnt, h, w, c, config):
    if config.enable_web:
        _web(cnt, h, w, c)
    if config.enable_sgfb:
        _sgfb(cnt, h, w, c, config.enable_sgfb_gradient_branch)


def count_cost(config, input_h=256, input_w=256):
    """Exact parameter count and FLOPs of ``config`` at the given input size."""
    params = sum(_size(shape) for _, shape, _ in param_shapes(config))
    cnt = _Counter()
    m = 2 ** config.num_scales
    h, w = -(-input_h // m) * m, -(-input_w // m) * m
    if config.enable_wb_prior:
        cnt.elem("white_balance", input_h * input_w * 3)
        cnt.elem("fuse", input_h * input_w * 3)
    c0 = config.base_channels
    cnt.conv("dense", h, w, 3, c0, k=3)
    cnt.elem("bias", h * w * c0)
    sizes = []
    for i in range(config.num_scales):
        c, c_next = config.channels(i), config.channels(i + 1)
        _wgsrb(cnt, h, w, c, config)
        sizes.append((h, w))
        cnt.conv("dense", h, w, c, c_next, k=2, stride=2)
        h, w = h // 2, w // 2
        cnt.elem("bias", h * w * c_next)
    _wgsrb(cnt, h, w, config.channels(config.num_scales), config)
    for i in reversed(range(config.num_scales)):
        c, c_next = config.channels(i), config.channels(i + 1)
        h, w = sizes[i]
        cnt.elem("bilinear", h * w * c_next)
        cnt.conv("pointwise", h, w, c_next, c)
        cnt.elem("bias", h * w * c)
        cnt.conv("pointwise", h, w, 2 * c, c)
        cnt.elem("bias", h * w * c)
        _wgsrb(cnt, h, w, c, config)
    cnt.conv("dense", h, w, c0, 3, k=3)
    cnt.elem("bias", h * w * 3)
    cnt.elem("add", input_h * input_w * 3)
    cnt.elem("clamp", input_h * input_w * 3)
    return CostReport(params, sum(cnt.by.values()), (input_h, input_w), dict(cnt.by))


def _size(shape):
    n = 1
    for d in shape:
        n *= d
    return n
