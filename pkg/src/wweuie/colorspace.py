"""Color representations: HVI, CIELab (sRGB/D65), CIEDE2000 and CIE xyY."""

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .validation import check_image

HVI_EPS = 1e-8

# IEC 61966-2-1 linear sRGB -> XYZ (D65)
SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
# white point taken from the matrix itself so that (1, 1, 1) maps to a = b = 0 exactly
D65_WHITE = SRGB_TO_XYZ.sum(axis=1)
D65_XY = (D65_WHITE[0] / D65_WHITE.sum(), D65_WHITE[1] / D65_WHITE.sum())


@dataclass
class HviImage:
    h: np.ndarray
    v: np.ndarray
    i: np.ndarray
    n_clamped: int = 0

    def stack(self):
        return np.stack([self.h, self.v, self.i], axis=-1)


def collapse_gain(i):
    """Intensity-collapse gain ``sin(pi * i / 2) + eps`` (collapse exponent 1)."""
    return np.sin(0.5 * np.pi * i) + HVI_EPS


def _hsv_parts(rgb):
    """Value, saturation, hue in sextants [0, 6) plus the argmax/argmin channels.

    Ties resolve to the first channel in R, G, B order.
    """
    vmax = rgb.max(axis=-1)
    vmin = rgb.min(axis=-1)
    imax = rgb.argmax(axis=-1)
    imin = rgb.argmin(axis=-1)
    delta = vmax - vmin
    chromatic = delta > 0
    safe_delta = np.where(chromatic, delta, 1.0)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    h6 = np.select(
        [imax == 0, imax == 1],
        [(g - b) / safe_delta, (b - r) / safe_delta + 2.0],
        (r - g) / safe_delta + 4.0,
    )
    h6 = np.where(chromatic, np.mod(h6, 6.0), 0.0)
    s = np.where(vmax > 0, delta / np.where(vmax > 0, vmax, 1.0), 0.0)
    return vmax, s, h6, imax, imin, delta


def rgb_to_hvi(img):
    """Map an sRGB image to the HVI planes.

    Samples outside [0, 1] are clamped and counted in ``n_clamped``.
    """
    img = check_image(img, channels=3)
    outside = int(np.count_nonzero((img < 0) | (img > 1)))
    if outside:
        warnings.warn(f"rgb_to_hvi clamped {outside} out-of-range samples", RuntimeWarning, stacklevel=2)
        img = np.clip(img, 0.0, 1.0)
    v, s, h6, _, _, _ = _hsv_parts(img)
    theta = h6 * (np.pi / 3.0)
    cs = collapse_gain(v) * s
    return HviImage(cs * np.cos(theta), cs * np.sin(theta), v, outside)


def hvi_jacobian(img):
    """Per-pixel Jacobian d(H, V, I)/d(R, G, B) as an ``(H, W, 3, 3)`` array.

    Input is assumed already inside [0, 1]. At achromatic pixels the chroma
    rows are set to zero (subgradient convention).
    """
    v, s, h6, imax, imin, delta = _hsv_parts(img)
    chromatic = delta > 0
    eye = np.eye(3)
    e_max = eye[imax]
    e_min = eye[imin]
    safe_delta = np.where(chromatic, delta, 1.0)[..., None]
    safe_v = np.where(v > 0, v, 1.0)[..., None]

    d_delta = e_max - e_min
    d_s = d_delta / safe_v - (delta / safe_v[..., 0] ** 2)[..., None] * e_max
    # h6 = (a - b) / delta + offset, with (a, b) picked by the max channel
    a_idx = np.choose(imax, [1, 2, 0])
    b_idx = np.choose(imax, [2, 0, 1])
    num = np.take_along_axis(img, a_idx[..., None], -1)[..., 0] - np.take_along_axis(img, b_idx[..., None], -1)[..., 0]
    d_h6 = (eye[a_idx] - eye[b_idx]) / safe_delta - (num / safe_delta[..., 0] ** 2)[..., None] * d_delta
    d_theta = d_h6 * (np.pi / 3.0)

    theta = h6 * (np.pi / 3.0)
    cos_t, sin_t = np.cos(theta)[..., None], np.sin(theta)[..., None]
    c = collapse_gain(v)[..., None]
    d_c = (0.5 * np.pi * np.cos(0.5 * np.pi * v))[..., None] * e_max
    s_ = s[..., None]

    d_hplane = d_c * s_ * cos_t + c * d_s * cos_t - c * s_ * sin_t * d_theta
    d_vplane = d_c * s_ * sin_t + c * d_s * sin_t + c * s_ * cos_t * d_theta
    mask = chromatic[..., None]
    d_hplane = np.where(mask, d_hplane, 0.0)
    d_vplane = np.where(mask, d_vplane, 0.0)
    return np.stack([d_hplane, d_vplane, e_max], axis=-2)


def hvi_to_rgb(hvi, return_irrecoverable=False):
    """Invert :func:`rgb_to_hvi`; output is clamped to [0, 1].

    Pixels whose intensity collapses the chroma to nothing while H or V is
    nonzero cannot be recovered; they are counted and returned as gray.
    """
    H = np.asarray(hvi.h, dtype=np.float64)
    V = np.asarray(hvi.v, dtype=np.float64)
    I = np.clip(np.asarray(hvi.i, dtype=np.float64), 0.0, 1.0)
    radius = np.hypot(H, V)
    lost = (np.sin(0.5 * np.pi * I) <= 0) & (radius > 0)
    n_lost = int(np.count_nonzero(lost))
    if n_lost:
        warnings.warn(f"hvi_to_rgb: {n_lost} irrecoverable pixels", RuntimeWarning, stacklevel=2)
    s = np.clip(np.where(lost, 0.0, radius / collapse_gain(I)), 0.0, 1.0)
    h6 = np.mod(np.arctan2(V, H) / (2 * np.pi), 1.0) * 6.0
    rgb = hsv_to_rgb(h6, s, I)
    if return_irrecoverable:
        return rgb, n_lost
    return rgb


def hsv_to_rgb(h6, s, v):
    """HSV to RGB with hue given in sextants [0, 6)."""
    sector = np.floor(h6).astype(np.intp) % 6
    f = h6 - np.floor(h6)
    p = v * (1 - s)
    q = v * (1 - s * f)
    t = v * (1 - s * (1 - f))
    table = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)]
    out = np.zeros(np.shape(v) + (3,))
    for k, (r, g, b) in enumerate(table):
        m = sector == k
        out[m, 0], out[m, 1], out[m, 2] = r[m], g[m], b[m]
    return np.clip(out, 0.0, 1.0)


def hsv_saturation(img):
    vmax = img.max(axis=-1)
    vmin = img.min(axis=-1)
    return np.where(vmax > 0, (vmax - vmin) / np.where(vmax > 0, vmax, 1.0), 0.0)


def srgb_to_linear(img):
    return np.where(img <= 0.04045, img / 12.92, ((img + 0.055) / 1.055) ** 2.4)


def rgb_to_xyz(img):
    rgb = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return srgb_to_linear(rgb) @ SRGB_TO_XYZ.T


def _lab_f(t):
    delta = 6.0 / 29.0
    return np.where(t > delta ** 3, np.cbrt(t), t / (3 * delta ** 2) + 4.0 / 29.0)


def xyz_to_lab(xyz):
    f = _lab_f(xyz / D65_WHITE)
    L = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def rgb_to_lab(img):
    """sRGB (D65) to CIELab; works on any ``(..., 3)`` array, clamping to [0, 1]."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.shape[-1] != 3:
        raise ValueError(f"expected a trailing axis of 3 channels, got {arr.shape}")
    return xyz_to_lab(rgb_to_xyz(arr))


def lab_to_rgb(lab):
    """Inverse of :func:`rgb_to_lab` without clamping; out-of-gamut colours fall outside [0, 1]."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    f = np.stack([fy + lab[..., 1] / 500.0, fy, fy - lab[..., 2] / 200.0], axis=-1)
    delta = 6.0 / 29.0
    t = np.where(f > delta, f ** 3, 3 * delta ** 2 * (f - 4.0 / 29.0))
    lin = (t * D65_WHITE) @ np.linalg.inv(SRGB_TO_XYZ).T
    return np.where(lin <= 0.0031308, 12.92 * lin, 1.055 * np.abs(lin) ** (1 / 2.4) - 0.055)


def ciede2000(lab1, lab2, kL=1.0, kC=1.0, kH=1.0):
    """CIEDE2000 colour difference between Lab triples (broadcasts over leading axes)."""
    lab1 = np.asarray(lab1, dtype=np.float64)
    lab2 = np.asarray(lab2, dtype=np.float64)
    L1, a1, b1 = lab1[..., 0], lab1[..., 1], lab1[..., 2]
    L2, a2, b2 = lab2[..., 0], lab2[..., 1], lab2[..., 2]

    c_bar = 0.5 * (np.hypot(a1, b1) + np.hypot(a2, b2))
    c7 = c_bar ** 7
    G = 0.5 * (1 - np.sqrt(c7 / (c7 + 25.0 ** 7)))
    a1p, a2p = (1 + G) * a1, (1 + G) * a2
    C1p, C2p = np.hypot(a1p, b1), np.hypot(a2p, b2)
    h1p = np.degrees(np.arctan2(b1, a1p)) % 360.0
    h2p = np.degrees(np.arctan2(b2, a2p)) % 360.0
    h1p = np.where((a1p == 0) & (b1 == 0), 0.0, h1p)
    h2p = np.where((a2p == 0) & (b2 == 0), 0.0, h2p)

    dLp = L2 - L1
    dCp = C2p - C1p
    zero_chroma = (C1p * C2p) == 0
    dh = h2p - h1p
    dh = np.where(dh > 180, dh - 360, np.where(dh < -180, dh + 360, dh))
    dh = np.where(zero_chroma, 0.0, dh)
    dHp = 2 * np.sqrt(C1p * C2p) * np.sin(np.radians(dh) / 2)

    Lbp = 0.5 * (L1 + L2)
    Cbp = 0.5 * (C1p + C2p)
    hsum = h1p + h2p
    hbp = np.where(
        np.abs(h1p - h2p) <= 180, 0.5 * hsum,
        np.where(hsum < 360, 0.5 * (hsum + 360), 0.5 * (hsum - 360)),
    )
    hbp = np.where(zero_chroma, hsum, hbp)

    T = (1 - 0.17 * np.cos(np.radians(hbp - 30)) + 0.24 * np.cos(np.radians(2 * hbp))
         + 0.32 * np.cos(np.radians(3 * hbp + 6)) - 0.20 * np.cos(np.radians(4 * hbp - 63)))
    d_theta = 30 * np.exp(-(((hbp - 275) / 25) ** 2))
    Cbp7 = Cbp ** 7
    RC = 2 * np.sqrt(Cbp7 / (Cbp7 + 25.0 ** 7))
    SL = 1 + 0.015 * (Lbp - 50) ** 2 / np.sqrt(20 + (Lbp - 50) ** 2)
    SC = 1 + 0.045 * Cbp
    SH = 1 + 0.015 * Cbp * T
    RT = -np.sin(np.radians(2 * d_theta)) * RC

    tL = dLp / (kL * SL)
    tC = dCp / (kC * SC)
    tH = dHp / (kH * SH)
    return np.sqrt(tL ** 2 + tC ** 2 + tH ** 2 + RT * tC * tH)


def rgb_to_xyy(img):
    """Per-pixel CIE (x, y, Y); black pixels take the D65 white chromaticity."""
    img = check_image(img, channels=3)
    xyz = rgb_to_xyz(img)
    total = xyz.sum(axis=-1)
    dark = total < 1e-9
    safe = np.where(dark, 1.0, total)
    x = np.where(dark, D65_XY[0], xyz[..., 0] / safe)
    y = np.where(dark, D65_XY[1], xyz[..., 1] / safe)
    return np.stack([x, y, xyz[..., 1]], axis=-1)


def write_xyy_csv(img, path, stride=1):
    """Write one ``x,y,Y`` row per pixel, sampling every ``stride``-th row and column."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    xyy = rgb_to_xyy(img)[::stride, ::stride].reshape(-1, 3)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "Y"])
        writer.writerows((f"{x:.6f}", f"{y:.6f}", f"{Y:.6f}") for x, y, Y in xyy)
    return len(xyy)
