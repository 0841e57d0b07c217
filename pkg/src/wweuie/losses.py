"""Composite restoration objective with analytic gradients.

Every loss takes ``(y, y_pred)`` (reference, prediction) and returns
``(value, gradient)`` where ``gradient`` is d(value)/d(y_pred) with the same
shape as the images. All reductions are means over samples.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _ssim
from .colorspace import hvi_jacobian, rgb_to_hvi
from .priors import SOBEL_X, SOBEL_Y, correlate3x3, correlate3x3_adjoint, sobel_magnitude, sobel_responses
from .validation import check_image, check_pair

logger = logging.getLogger(__name__)

CHARBONNIER_EPS = 1e-3
EDGE_EPS = 1e-8

TERMS = ("charbonnier", "vgg", "ssim", "edge", "hvi")


@dataclass(frozen=True)
class LossWeights:
    """Term weights in the order Charbonnier, perceptual, SSIM, edge, HVI."""

    charbonnier: float = 1.0
    vgg: float = 0.1
    ssim: float = 0.1
    edge: float = 0.4
    hvi: float = 0.5

    def __post_init__(self):
        if any(w < 0 for w in self.as_tuple()):
            raise ValueError(f"loss weights must be >= 0, got {self.as_tuple()}")

    def as_tuple(self):
        return tuple(getattr(self, t) for t in TERMS)

    @classmethod
    def parse(cls, text):
        """Parse ``"c,vgg,ssim,edge,hvi"`` into weights."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 5:
            raise ValueError(f"expected 5 comma-separated weights, got {text!r}")
        return cls(*(float(p) for p in parts))

    def scaled(self, factor):
        return LossWeights(*(factor * w for w in self.as_tuple()))


@dataclass
class LossBreakdown:
    terms: dict
    weights: LossWeights
    total: float
    gradient: np.ndarray
    missing: tuple = field(default_factory=tuple)


def charbonnier(y, y_pred, eps=CHARBONNIER_EPS):
    y, y_pred = check_pair(y, y_pred)
    return _charbonnier(y, y_pred, eps)


def _charbonnier(y, y_pred, eps=CHARBONNIER_EPS):
    diff = y_pred - y
    root = np.sqrt(diff * diff + eps * eps)
    return float(root.mean()), diff / (root * diff.size)


def ssim_loss(y, y_pred):
    y, y_pred = check_pair(y, y_pred, min_size=_ssim.WIN)
    score, grad = _ssim.ssim_and_grad(y, y_pred)
    return 1.0 - score, -grad


def edge_loss(y, y_pred, eps=EDGE_EPS):
    """Mean squared difference of per-channel Sobel magnitudes."""
    y, y_pred = check_pair(y, y_pred, min_size=3)
    gx, gy = sobel_responses(np.moveaxis(y, -1, 0))
    mag_ref = np.sqrt(gx * gx + gy * gy + eps)
    px, py = sobel_responses(np.moveaxis(y_pred, -1, 0))
    mag = np.sqrt(px * px + py * py + eps)
    diff = mag - mag_ref
    value = float(np.mean(diff * diff))
    d_mag = 2.0 * diff / diff.size
    grad = (correlate3x3_adjoint(d_mag * px / mag, SOBEL_X)
            + correlate3x3_adjoint(d_mag * py / mag, SOBEL_Y))
    return value, np.ascontiguousarray(np.moveaxis(grad, 0, -1))


def hvi_loss(y, y_pred, eps=CHARBONNIER_EPS):
    """Charbonnier distance between the HVI transforms of both images."""
    y, y_pred = check_pair(y, y_pred, channels=3)
    y = np.clip(y, 0.0, 1.0)
    inside = (y_pred >= 0) & (y_pred <= 1)
    y_pred = np.clip(y_pred, 0.0, 1.0)
    ref = rgb_to_hvi(y).stack()
    pred = rgb_to_hvi(y_pred).stack()
    value, d_hvi = _charbonnier(ref, pred, eps)
    grad = np.einsum("...k,...kc->...c", d_hvi, hvi_jacobian(y_pred))
    return value, grad * inside


class IdentityExtractor:
    """Feature extractor returning the image itself as the only feature map."""

    def features(self, img):
        return [np.asarray(img, dtype=np.float64)]

    def vjp(self, img, cotangents):
        return cotangents[0]


class ConvFeatureExtractor:
    """Fixed, seeded two-layer 3x3 conv + ReLU stack used as a stand-in
    perceptual network. Both activations are returned as features."""

    def __init__(self, widths=(8, 8), seed=0, in_channels=3):
        rng = np.random.default_rng(seed)
        self.kernels = []
        cin = in_channels
        for cout in widths:
            bound = np.sqrt(6.0 / (cin * 9))
            self.kernels.append(rng.uniform(-bound, bound, size=(cout, cin, 3, 3)))
            cin = cout

    @staticmethod
    def _conv(x, k):
        return np.stack([sum(correlate3x3(x[ci], k[co, ci]) for ci in range(k.shape[1]))
                         for co in range(k.shape[0])])

    @staticmethod
    def _conv_adjoint(g, k):
        return np.stack([sum(correlate3x3_adjoint(g[co], k[co, ci]) for co in range(k.shape[0]))
                         for ci in range(k.shape[1])])

    def _forward(self, img):
        x = np.moveaxis(np.asarray(img, dtype=np.float64), -1, 0)
        pre, acts = [], []
        for k in self.kernels:
            z = self._conv(x, k)
            x = np.maximum(z, 0.0)
            pre.append(z)
            acts.append(x)
        return pre, acts

    def features(self, img):
        return self._forward(img)[1]

    def vjp(self, img, cotangents):
        pre, _ = self._forward(img)
        g = np.zeros_like(pre[-1])
        for layer in reversed(range(len(self.kernels))):
            g = (g + cotangents[layer]) * (pre[layer] > 0)
            g = self._conv_adjoint(g, self.kernels[layer])
        return np.moveaxis(g, 0, -1)


def perceptual_loss(y, y_pred, extractor):
    """Mean over feature maps of the L2 norm of the feature difference.

    Returns ``(value, gradient)``; the gradient is ``None`` when the extractor
    has no ``vjp`` method.
    """
    y, y_pred = check_pair(y, y_pred)
    feats_ref = extractor.features(y)
    feats = extractor.features(y_pred)
    if len(feats_ref) != len(feats) or not feats:
        raise ValueError("extractor returned a different number of feature maps per image")
    cotangents = []
    value = 0.0
    for f_ref, f in zip(feats_ref, feats):
        if f_ref.shape != f.shape:
            raise ValueError(f"feature shape mismatch: {f_ref.shape} vs {f.shape}")
        diff = f - f_ref
        norm = float(np.sqrt(np.sum(diff * diff)))
        value += norm
        cotangents.append(diff / (norm * len(feats)) if norm > 0 else np.zeros_like(diff))
    value /= len(feats)
    if not hasattr(extractor, "vjp"):
        return value, None
    return value, extractor.vjp(y_pred, cotangents)


def total_loss(y, y_pred, weights=None, extractor=None):
    """Weighted sum of all terms plus the gradient of the total.

    Without an extractor the perceptual term is recorded as 0 and listed in
    ``missing``.
    """
    weights = weights or LossWeights()
    y, y_pred = check_pair(y, y_pred, channels=3)
    terms, grads, missing = {}, {}, []
    terms["charbonnier"], grads["charbonnier"] = charbonnier(y, y_pred)
    if extractor is None:
        terms["vgg"], grads["vgg"] = 0.0, None
        missing.append("vgg")
    else:
        terms["vgg"], grads["vgg"] = perceptual_loss(y, y_pred, extractor)
        if grads["vgg"] is None:
            missing.append("vgg-gradient")
    if min(y.shape[:2]) >= _ssim.WIN:
        terms["ssim"], grads["ssim"] = ssim_loss(y, y_pred)
    else:
        terms["ssim"], grads["ssim"] = 0.0, None
        missing.append("ssim")
    terms["edge"], grads["edge"] = edge_loss(y, y_pred)
    terms["hvi"], grads["hvi"] = hvi_loss(y, y_pred)

    total = 0.0
    gradient = np.zeros_like(y_pred)
    for name, w in zip(TERMS, weights.as_tuple()):
        total += w * terms[name]
        if grads[name] is not None and w != 0:
            gradient += w * grads[name]
    return LossBreakdown(terms, weights, total, gradient, tuple(missing))


def fit_image(init, reference, weights=None, iters=500, step=0.05, extractor=None,
              armijo=1e-4, min_step=1e-12):
    """Minimise :func:`total_loss` over the pixels of a working image.

    The descent direction is the gradient scaled by the sample count (the
    per-sample gradient, independent of image size). Each iteration tries
    twice the previous accepted step, capped at ``step``, and halves it until
    the Armijo condition holds, so the loss never increases. The working image
    is clamped to [0, 1] after every step.

    Returns the final image and the loss after each iteration.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    reference = check_image(reference, channels=3, name="reference")
    work = check_image(init, channels=3, name="init").copy()
    if work.shape != reference.shape:
        raise ValueError(f"shape mismatch: {work.shape} vs {reference.shape}")
    work = np.clip(work, 0.0, 1.0)
    n = work.size
    current = total_loss(reference, work, weights, extractor)
    trace = []
    t = step
    for it in range(iters):
        direction = current.gradient * n
        t = min(step, 2.0 * t)
        while True:
            candidate = np.clip(work - t * direction, 0.0, 1.0)
            trial = total_loss(reference, candidate, weights, extractor)
            if not np.isfinite(trial.total):
                raise FloatingPointError(f"loss became non-finite at iteration {it}")
            decrease = armijo * float(np.sum(direction * (work - candidate))) / n
            if trial.total <= current.total - decrease:
                work, current = candidate, trial
                break
            t *= 0.5
            if t < min_step:
                break
        trace.append(current.total)
        logger.debug("fit_image iter %d loss %.8g step %.3g", it, current.total, t)
    return work, np.asarray(trace)


def _safe_pixel(rng, gap):
    while True:
        px = rng.uniform(0.1, 0.95, size=3)
        d = np.abs(px[:, None] - px[None, :])[np.triu_indices(3, 1)]
        if d.min() > gap + 0.02:
            return px


def _safe_pair(rng, shape, gap=0.05, floor=20 * CHARBONNIER_EPS):
    """Random images whose channels are pairwise more than ``gap`` apart and
    whose HVI coordinates differ by at least ``floor`` at every pixel.

    The gap keeps HVI away from hue-sector switches and max/min ties; the
    floor keeps the Charbonnier residual out of its high-curvature core (see
    :func:`_residual_pair`).
    """
    y = np.empty(shape)
    y_pred = np.empty(shape)
    flat_y, flat_p = y.reshape(-1, 3), y_pred.reshape(-1, 3)
    for k in range(flat_y.shape[0]):
        flat_y[k] = _safe_pixel(rng, gap)
        ref = rgb_to_hvi(flat_y[k][None, None]).stack()
        while True:
            flat_p[k] = _safe_pixel(rng, gap)
            if np.all(np.abs(rgb_to_hvi(flat_p[k][None, None]).stack() - ref) >= floor):
                break
    return y, y_pred


def _residual_pair(rng, shape, floor=20 * CHARBONNIER_EPS):
    """Random pair whose per-sample residual is at least ``floor`` in magnitude.

    Near zero residual the Charbonnier third derivative is of order 1/eps**2,
    which makes an h=1e-4 central difference itself inaccurate.
    """
    y = rng.uniform(0.0, 1.0, size=shape)
    sign = np.where(y < 0.5, 1.0, -1.0)
    return y, y + sign * rng.uniform(floor, 0.45, size=shape)


def _edge_safe_mask(y_pred, floor=0.05):
    """Samples whose 3x3 neighbourhood has Sobel magnitude >= ``floor``.

    Each input sample only feeds the magnitudes within one pixel of it, and
    near a vanishing magnitude the square root is too curved for h=1e-4.
    """
    mag = np.pad(sobel_magnitude(y_pred), ((1, 1), (1, 1), (0, 0)), mode="edge")
    h, w = y_pred.shape[:2]
    low = np.min([mag[i:i + h, j:j + w] for i in range(3) for j in range(3)], axis=0)
    return low >= floor


GRAD_TOLERANCES = {"charbonnier": 1e-5, "edge": 1e-3, "ssim": 1e-2, "hvi": 1e-2}

_LOSSES = {"charbonnier": charbonnier, "edge": edge_loss, "ssim": ssim_loss, "hvi": hvi_loss}


def finite_difference_error(loss, y, y_pred, coords, h=1e-4):
    """Max relative error between the analytic and central-difference gradient.

    Per coordinate, the error is divided by ``max(|analytic|, |numeric|)``
    floored at 1e-3 of the largest sampled numeric entry, so coordinates whose
    true gradient is essentially zero do not dominate.
    """
    _, grad = loss(y, y_pred)
    analytic = np.array([grad[c] for c in coords])
    numeric = np.empty(len(coords))
    for k, c in enumerate(coords):
        plus = y_pred.copy()
        plus[c] += h
        minus = y_pred.copy()
        minus[c] -= h
        numeric[k] = (loss(y, plus)[0] - loss(y, minus)[0]) / (2 * h)
    floor = 1e-3 * max(np.abs(numeric).max(), 1e-300)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def grad_check(losses=None, trials=3, seed=0, size=16, samples=128, h=1e-4):
    """Finite-difference verification of each loss on random ``size x size x 3`` pairs.

    Returns rows of ``(name, max_rel_error, tolerance, passed)``.
    """
    names = list(losses or GRAD_TOLERANCES)
    rng = np.random.default_rng(seed)
    shape = (size, size, 3)
    rows = []
    for name in names:
        if name not in _LOSSES:
            raise ValueError(f"unknown loss {name!r}; choose from {sorted(_LOSSES)}")
        worst = 0.0
        for _ in range(trials):
            if name == "hvi":
                y, y_pred = _safe_pair(rng, shape)
            elif name == "charbonnier":
                y, y_pred = _residual_pair(rng, shape)
            else:
                y, y_pred = rng.uniform(0.0, 1.0, size=(2,) + shape)
            pool = np.arange(y.size)
            if name == "edge":
                pool = np.flatnonzero(_edge_safe_mask(y_pred))
            flat = rng.choice(pool, size=min(samples, pool.size), replace=False)
            coords = [np.unravel_index(i, shape) for i in flat]
            worst = max(worst, finite_difference_error(_LOSSES[name], y, y_pred, coords, h))
        tol = GRAD_TOLERANCES[name]
        rows.append((name, worst, tol, worst < tol))
    return rows
