"""Fused loops for the memory-bound feature-map operations.

Each kernel reads edge-replicated neighbours directly instead of padding, and
produces the same values as the plain numpy formulation (same tap order).
"""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def depthwise3x3(x, k):
    c, h, w = x.shape
    out = np.empty_like(x)
    for ch in range(c):
        k00, k01, k02 = k[ch, 0, 0], k[ch, 0, 1], k[ch, 0, 2]
        k10, k11, k12 = k[ch, 1, 0], k[ch, 1, 1], k[ch, 1, 2]
        k20, k21, k22 = k[ch, 2, 0], k[ch, 2, 1], k[ch, 2, 2]
        for i in range(h):
            up = x[ch, max(i - 1, 0)]
            mid = x[ch, i]
            dn = x[ch, min(i + 1, h - 1)]
            row = out[ch, i]
            for j in range(1, w - 1):
                row[j] = (k00 * up[j - 1] + k01 * up[j] + k02 * up[j + 1]
                          + k10 * mid[j - 1] + k11 * mid[j] + k12 * mid[j + 1]
                          + k20 * dn[j - 1] + k21 * dn[j] + k22 * dn[j + 1])
            for j in (0, w - 1):
                a = max(j - 1, 0)
                b = min(j + 1, w - 1)
                row[j] = (k00 * up[a] + k01 * up[j] + k02 * up[b]
                          + k10 * mid[a] + k11 * mid[j] + k12 * mid[b]
                          + k20 * dn[a] + k21 * dn[j] + k22 * dn[b])
    return out


@numba.njit(cache=True, nogil=True)
def sobel_magnitude(x):
    c, h, w = x.shape
    out = np.empty_like(x)
    for ch in range(c):
        for i in range(h):
            r0 = max(i - 1, 0)
            r2 = min(i + 1, h - 1)
            for j in range(w):
                c0 = max(j - 1, 0)
                c2 = min(j + 1, w - 1)
                a, b, cc = x[ch, r0, c0], x[ch, r0, j], x[ch, r0, c2]
                d, f = x[ch, i, c0], x[ch, i, c2]
                g, hh, ii = x[ch, r2, c0], x[ch, r2, j], x[ch, r2, c2]
                gx = (cc - a) + 2 * (f - d) + (ii - g)
                gy = (g - a) + 2 * (hh - b) + (ii - cc)
                out[ch, i, j] = np.sqrt(gx * gx + gy * gy)
    return out


@numba.njit(cache=True, nogil=True)
def resize_bilinear(x, y0, y1, wy, x0, x1, wx):
    c = x.shape[0]
    nh = y0.shape[0]
    nw = x0.shape[0]
    out = np.empty((c, nh, nw), dtype=x.dtype)
    for ch in range(c):
        for i in range(nh):
            a, b, ty = y0[i], y1[i], wy[i]
            for j in range(nw):
                p, q, tx = x0[j], x1[j], wx[j]
                top = x[ch, a, p] * (1 - tx) + x[ch, a, q] * tx
                bot = x[ch, b, p] * (1 - tx) + x[ch, b, q] * tx
                out[ch, i, j] = top * (1 - ty) + bot * ty
    return out
