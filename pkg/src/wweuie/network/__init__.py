"""Forward-only enhancement network, weights and cost accounting."""

from .blocks import dws_hinb, sgfb_blend, sgfb_forward, web_forward, wgsrb_forward
from .config import NetConfig
from .cost import CostReport, conv_flops, conv_params, count_cost
from .layers import conv1x1, conv3x3, conv_down2, dws_conv, hin
from .model import model_forward, param_shapes
from .weights import WeightStore, init_random, load_weights, save_weights, zero_weights

REFERENCE_PARAMS_M = 0.734
REFERENCE_FLOPS_G = 6.251

__all__ = [
    "CostReport", "NetConfig", "WeightStore", "conv1x1", "conv3x3", "conv_down2", "conv_flops",
    "conv_params", "count_cost", "dws_conv", "dws_hinb", "hin", "init_random", "load_weights",
    "model_forward", "param_shapes", "save_weights", "sgfb_blend", "sgfb_forward", "web_forward",
    "wgsrb_forward", "zero_weights", "REFERENCE_PARAMS_M", "REFERENCE_FLOPS_G",
]
