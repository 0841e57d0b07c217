"""SSIM with an 11x11 Gaussian window (sigma 1.5) and its gradient.

Local statistics use 'valid' filtering, so the similarity map is
``(H - 10) x (W - 10)`` per channel and the score is its mean over positions
and channels. Metrics and losses both call :func:`ssim_and_grad`.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

WIN = 11
SIGMA = 1.5
K1, K2 = 0.01, 0.03
DATA_RANGE = 1.0
C1 = (K1 * DATA_RANGE) ** 2
C2 = (K2 * DATA_RANGE) ** 2


def gaussian_window(size=WIN, sigma=SIGMA):
    r = np.arange(size, dtype=np.float64) - (size - 1) / 2
    g = np.exp(-(r ** 2) / (2 * sigma ** 2))
    return g / g.sum()


_G = gaussian_window()


def _filter_valid(a):
    rows = sliding_window_view(a, WIN, axis=-2) @ _G
    return sliding_window_view(rows, WIN, axis=-1) @ _G


def _filter_valid_adjoint(g):
    pad = [(0, 0)] * (g.ndim - 2) + [(WIN - 1, WIN - 1), (0, 0)]
    rows = sliding_window_view(np.pad(g, pad), WIN, axis=-2) @ _G[::-1]
    pad = [(0, 0)] * (g.ndim - 2) + [(0, 0), (WIN - 1, WIN - 1)]
    return sliding_window_view(np.pad(rows, pad), WIN, axis=-1) @ _G[::-1]


def ssim_and_grad(y, y_pred, need_grad=True):
    """Mean SSIM between two ``(H, W, C)`` images and d(SSIM)/d(y_pred)."""
    if min(y.shape[:2]) < WIN:
        raise ValueError(f"SSIM needs images of at least {WIN}x{WIN}, got {y.shape[0]}x{y.shape[1]}")
    x = np.moveaxis(y, -1, 0)
    p = np.moveaxis(y_pred, -1, 0)
    mu_x = _filter_valid(x)
    mu_p = _filter_valid(p)
    var_x = _filter_valid(x * x) - mu_x ** 2
    var_p = _filter_valid(p * p) - mu_p ** 2
    cov = _filter_valid(x * p) - mu_x * mu_p

    a1 = 2 * mu_x * mu_p + C1
    a2 = 2 * cov + C2
    b1 = mu_x ** 2 + mu_p ** 2 + C1
    b2 = var_x + var_p + C2
    smap = (a1 * a2) / (b1 * b2)
    score = float(smap.mean())
    if not need_grad:
        return score, None

    n = smap.size
    d_mu = (2 * mu_x * a2) / (b1 * b2) - smap * 2 * mu_p / b1
    d_var = -smap / b2
    d_cov = 2 * a1 / (b1 * b2)
    # chain through raw moments m_p = w*p, m_pp = w*p^2, m_xp = w*(x p)
    g_mp = (d_mu - 2 * mu_p * d_var - mu_x * d_cov) / n
    g_mpp = d_var / n
    g_mxp = d_cov / n
    grad = (_filter_valid_adjoint(g_mp) + 2 * p * _filter_valid_adjoint(g_mpp)
            + x * _filter_valid_adjoint(g_mxp))
    return score, np.ascontiguousarray(np.moveaxis(grad, 0, -1))
