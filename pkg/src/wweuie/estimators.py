"""scikit-learn compatible wrappers around the functional API.

``X`` is a single ``(H, W, 3)`` image, a 4-D stack or a list of images; the
output mirrors that structure.
"""

import os

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import metrics
from .network import NetConfig, WeightStore, count_cost, init_random, load_weights, model_forward
from .priors import SubbandSet, WbGamma, fuse_wb, haar_dwt2, haar_idwt2, white_balance
from .validation import check_images


def _like_input(X, outputs):
    if isinstance(X, (list, tuple)):
        return outputs
    if np.asarray(X).ndim == 4:
        return np.stack(outputs)
    return outputs[0]


class WhiteBalancePrior(TransformerMixin, BaseEstimator):
    """Gray-world white balance blended with the raw image per channel."""

    def __init__(self, gamma=(0.5, 0.5, 0.5)):
        self.gamma = gamma

    def fit(self, X=None, y=None):
        self.gamma_ = WbGamma(*np.asarray(self.gamma, dtype=np.float64).reshape(3))
        return self

    def transform(self, X):
        check_is_fitted(self, "gamma_")
        images = check_images(X)
        return _like_input(X, [fuse_wb(x, white_balance(x), self.gamma_) for x in images])


class HaarWavelet(TransformerMixin, BaseEstimator):
    """One-level Haar transform; subbands are stacked along the channel axis
    as ``[LL, LH, HL, HH]`` blocks of C channels each."""

    def fit(self, X=None, y=None):
        self.fitted_ = True
        return self

    def transform(self, X):
        check_is_fitted(self, "fitted_")
        images = check_images(X, channels=(1, 3))
        out = []
        for x in images:
            sb = haar_dwt2(x)
            out.append(np.concatenate([sb.ll, sb.lh, sb.hl, sb.hh], axis=-1))
        return _like_input(X, out)

    def inverse_transform(self, X):
        check_is_fitted(self, "fitted_")
        stacks = X if isinstance(X, (list, tuple)) or np.asarray(X).ndim == 4 else [X]
        out = []
        for s in stacks:
            s = np.asarray(s, dtype=np.float64)
            c = s.shape[-1] // 4
            bands = [s[..., k * c:(k + 1) * c] for k in range(4)]
            out.append(haar_idwt2(SubbandSet(*bands, (2 * s.shape[0], 2 * s.shape[1]))))
        return _like_input(X, out)


class WWEUIEEnhancer(TransformerMixin, BaseEstimator):
    """The full enhancement network as an estimator.

    ``fit`` does not train: it loads ``weights`` (a path or a
    :class:`WeightStore`) or, when ``weights`` is None, draws a seeded random
    initialization from the architecture parameters.
    """

    def __init__(self, base_channels=32, num_scales=3, channel_multiplier=2, block_order="web-sgfb",
                 enable_wb_prior=True, enable_web=True, enable_sgfb=True,
                 enable_sgfb_gradient_branch=True, seed=0, weights=None):
        self.base_channels = base_channels
        self.num_scales = num_scales
        self.channel_multiplier = channel_multiplier
        self.block_order = block_order
        self.enable_wb_prior = enable_wb_prior
        self.enable_web = enable_web
        self.enable_sgfb = enable_sgfb
        self.enable_sgfb_gradient_branch = enable_sgfb_gradient_branch
        self.seed = seed
        self.weights = weights

    def _config(self):
        return NetConfig(self.base_channels, self.num_scales, self.channel_multiplier, self.block_order,
                         bool(self.enable_wb_prior), bool(self.enable_web), bool(self.enable_sgfb),
                         bool(self.enable_sgfb_gradient_branch), int(self.seed))

    def fit(self, X=None, y=None):
        if isinstance(self.weights, WeightStore):
            self.weights_ = self.weights
        elif isinstance(self.weights, (str, os.PathLike)):
            self.weights_ = load_weights(self.weights)
        elif self.weights is None:
            self.weights_ = init_random(self._config())
        else:
            raise TypeError(f"weights must be a path, a WeightStore or None, got {type(self.weights).__name__}")
        self.config_ = self.weights_.config
        self.cost_ = count_cost(self.config_, 256, 256)
        return self

    def transform(self, X):
        check_is_fitted(self, "weights_")
        images = check_images(X)
        return _like_input(X, [model_forward(x, self.weights_) for x in images])

    predict = transform

    def score(self, X, y):
        """Mean PSNR (dB) of the enhanced images against the references ``y``."""
        pred = self.transform(X)
        preds = pred if isinstance(pred, list) else list(np.asarray(pred).reshape((-1,) + np.shape(pred)[-3:]))
        refs = check_images(y)
        return float(np.mean([metrics.psnr(r, p) for r, p in zip(refs, preds)]))
