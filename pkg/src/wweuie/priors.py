"""Network-independent priors: gray-world white balance, one-level Haar
analysis/synthesis and Sobel gradient magnitude."""

from dataclasses import dataclass

import numpy as np

from .image import load_image, pad_to_multiple, save_image
from .validation import check_image

WB_EPS = 1e-6

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T.copy()


@dataclass(frozen=True)
class SubbandSet:
    """Four half-resolution planes from one Haar analysis step.

    ``source_shape`` is the (H, W) of the analysed image before any padding,
    so synthesis can crop back to it.
    """

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray
    source_shape: tuple

    @property
    def padded(self):
        h, w = self.source_shape
        return h % 2 == 1 or w % 2 == 1

    def bands(self):
        return {"ll": self.ll, "lh": self.lh, "hl": self.hl, "hh": self.hh}


@dataclass(frozen=True)
class WbGamma:
    """Per-channel fusion weights between the raw and white-balanced image."""

    gamma_r: float = 0.5
    gamma_g: float = 0.5
    gamma_b: float = 0.5

    def __post_init__(self):
        for v in self.as_array():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"gamma components must lie in [0, 1], got {tuple(self.as_array())}")

    def as_array(self):
        return np.array([self.gamma_r, self.gamma_g, self.gamma_b], dtype=np.float64)


def _check_wb_input(img):
    img = check_image(img, channels=3)
    if np.any(img < 0):
        raise ValueError("white balance needs nonnegative samples")
    return img


def gray_world_gain(img, eps=WB_EPS):
    """Scale each channel so that all channel means approach the gray mean."""
    img = _check_wb_input(img)
    mu_c = img.mean(axis=(0, 1))
    mu_g = mu_c.mean()
    return img * (mu_g / (mu_c + eps))


def white_balance(img, eps=WB_EPS):
    """Gray-world gain, per-channel log-domain centring, then global min-max.

    A constant image has zero dynamic range after centring and maps to zeros.
    """
    x = gray_world_gain(img, eps)
    x_log = np.log(x + eps)
    x_log -= x_log.mean(axis=(0, 1))
    x_wb = np.exp(x_log)
    lo, hi = x_wb.min(), x_wb.max()
    return (x_wb - lo) / (hi - lo + eps)


def fuse_wb(x, x_wb, gamma):
    """Per-channel convex blend ``gamma * x_wb + (1 - gamma) * x``."""
    x = check_image(x, channels=3, name="x")
    x_wb = check_image(x_wb, channels=3, name="x_wb")
    if x.shape != x_wb.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {x_wb.shape}")
    if not isinstance(gamma, WbGamma):
        gamma = WbGamma(*np.asarray(gamma, dtype=np.float64).reshape(3))
    g = gamma.as_array()
    return g * x_wb + (1.0 - g) * x


def haar_analysis(arr):
    """Haar analysis over the last two axes (which must be even-sized)."""
    a = arr[..., 0::2, 0::2]
    b = arr[..., 0::2, 1::2]
    c = arr[..., 1::2, 0::2]
    d = arr[..., 1::2, 1::2]
    ll = (a + b + c + d) * 0.25
    lh = (a + b - c - d) * 0.25
    hl = (a - b + c - d) * 0.25
    hh = (a - b - c + d) * 0.25
    return ll, lh, hl, hh


def haar_synthesis(ll, lh, hl, hh):
    """Inverse of :func:`haar_analysis`."""
    shape = ll.shape[:-2] + (2 * ll.shape[-2], 2 * ll.shape[-1])
    out = np.empty(shape, dtype=np.result_type(ll, lh, hl, hh))
    out[..., 0::2, 0::2] = ll + lh + hl + hh
    out[..., 0::2, 1::2] = ll + lh - hl - hh
    out[..., 1::2, 0::2] = ll - lh + hl - hh
    out[..., 1::2, 1::2] = ll - lh - hl + hh
    return out


def haar_dwt2(img):
    """One-level 2-D Haar transform of an ``(H, W, C)`` image.

    Odd dimensions are edge-replicated on the bottom/right first.
    """
    img = check_image(img, channels="any", min_size=2)
    padded, source = pad_to_multiple(img, 2)
    planes = haar_analysis(np.moveaxis(padded, -1, 0))
    ll, lh, hl, hh = (np.ascontiguousarray(np.moveaxis(p, 0, -1)) for p in planes)
    return SubbandSet(ll, lh, hl, hh, tuple(source))


def haar_idwt2(sb):
    bands = [np.asarray(b, dtype=np.float64) for b in (sb.ll, sb.lh, sb.hl, sb.hh)]
    if any(b.ndim != 3 or b.shape != bands[0].shape for b in bands):
        raise ValueError("subbands must share one (H, W, C) shape")
    out = haar_synthesis(*(np.moveaxis(b, -1, 0) for b in bands))
    out = np.moveaxis(out, 0, -1)
    h, w = sb.source_shape
    if not (2 * bands[0].shape[0] - 1 <= h <= 2 * bands[0].shape[0]
            and 2 * bands[0].shape[1] - 1 <= w <= 2 * bands[0].shape[1]):
        raise ValueError(f"source shape {sb.source_shape} inconsistent with subbands {bands[0].shape}")
    return np.ascontiguousarray(out[:h, :w])


def correlate3x3(arr, kernel):
    """3x3 correlation over the last two axes with edge-replicate padding."""
    h, w = arr.shape[-2:]
    pad = [(0, 0)] * (arr.ndim - 2) + [(1, 1), (1, 1)]
    p = np.pad(arr, pad, mode="edge")
    out = np.zeros_like(arr)
    for i in range(3):
        for j in range(3):
            k = kernel[i, j]
            if k != 0:
                out += k * p[..., i:i + h, j:j + w]
    return out


def correlate3x3_adjoint(grad, kernel):
    """Adjoint of :func:`correlate3x3` (maps an output cotangent to the input)."""
    h, w = grad.shape[-2:]
    p = np.zeros(grad.shape[:-2] + (h + 2, w + 2), dtype=grad.dtype)
    for i in range(3):
        for j in range(3):
            k = kernel[i, j]
            if k != 0:
                p[..., i:i + h, j:j + w] += k * grad
    # fold replicated border back onto the edge pixels
    p[..., 1, :] += p[..., 0, :]
    p[..., h, :] += p[..., h + 1, :]
    p[..., :, 1] += p[..., :, 0]
    p[..., :, w] += p[..., :, w + 1]
    return p[..., 1:h + 1, 1:w + 1].copy()


def sobel_responses(arr):
    """Horizontal and vertical Sobel responses over the last two axes.

    Evaluated separably (difference first, then smoothing) so flat regions give exact zeros.
    """
    h, w = arr.shape[-2:]
    pad = [(0, 0)] * (arr.ndim - 2) + [(1, 1), (1, 1)]
    p = np.pad(np.asarray(arr), pad, mode="edge")
    dx = p[..., :, 2:] - p[..., :, :-2]
    dy = p[..., 2:, :] - p[..., :-2, :]
    gx = dx[..., 0:h, :] + 2 * dx[..., 1:h + 1, :] + dx[..., 2:h + 2, :]
    gy = dy[..., :, 0:w] + 2 * dy[..., :, 1:w + 1] + dy[..., :, 2:w + 2]
    return gx, gy


def sobel_magnitude(img):
    """Per-channel Sobel gradient magnitude of an ``(H, W, C)`` image."""
    img = check_image(img, channels="any", min_size=3)
    planes = np.moveaxis(img, -1, 0)
    gx, gy = sobel_responses(planes)
    return np.ascontiguousarray(np.moveaxis(np.sqrt(gx * gx + gy * gy), 0, -1))


def save_subbands(sb, prefix):
    """Write the four bands as ``<prefix>.ll.pfm`` ... ``<prefix>.hh.pfm``; returns the paths."""
    paths = []
    for name, band in sb.bands().items():
        path = f"{prefix}.{name}.pfm"
        save_image(band, path)
        paths.append(path)
    return paths


def load_subbands(prefix, source_shape=None):
    """Read bands written by :func:`save_subbands` (source assumed even-sized unless given)."""
    bands = [load_image(f"{prefix}.{name}.pfm") for name in ("ll", "lh", "hl", "hh")]
    if source_shape is None:
        source_shape = (2 * bands[0].shape[0], 2 * bands[0].shape[1])
    return SubbandSet(*bands, tuple(source_shape))
