"""Evaluation metrics: PSNR, SSIM, UCIQE and colour-chart CIEDE2000."""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _ssim
from .colorspace import ciede2000, hsv_saturation, rgb_to_lab
from .validation import check_image, check_pair

PSNR_CAP = 100.0

UCIQE_COEFFS = (0.4680, 0.2745, 0.2576)


def psnr(y, y_pred):
    """Peak signal-to-noise ratio in dB for peak 1; identical inputs give the 100 dB cap."""
    y, y_pred = check_pair(y, y_pred)
    mse = float(np.mean((y - y_pred) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * np.log10(1.0 / mse))


def ssim(y, y_pred):
    y, y_pred = check_pair(y, y_pred, min_size=_ssim.WIN)
    return _ssim.ssim_and_grad(y, y_pred, need_grad=False)[0]


def _std(a):
    # shifting by one sample keeps the result exactly 0 for constant input
    return float(np.std(a - a.flat[0]))


def uciqe(img):
    """Underwater colour image quality evaluation.

    Weighted sum of chroma standard deviation (scaled by 1/100), the 1%-99%
    percentile spread of L (scaled by 1/100) and mean HSV saturation.
    """
    img = check_image(img, channels=3)
    lab = rgb_to_lab(img)
    chroma = np.hypot(lab[..., 1], lab[..., 2])
    sigma_c = _std(chroma) / 100.0
    p1, p99 = np.percentile(lab[..., 0], [1, 99])
    con_l = (p99 - p1) / 100.0
    mu_s = float(np.mean(hsv_saturation(np.clip(img, 0.0, 1.0))))
    c1, c2, c3 = UCIQE_COEFFS
    return c1 * sigma_c + c2 * con_l + c3 * mu_s


@dataclass(frozen=True)
class Patch:
    x0: int
    y0: int
    x1: int
    y1: int
    rgb: tuple


@dataclass
class PatchSpec:
    """Rectangles ``[x0, x1) x [y0, y1)`` with reference sRGB triples in [0, 1]."""

    patches: list = field(default_factory=list)

    def __len__(self):
        return len(self.patches)

    def validate(self, height, width):
        if not self.patches:
            raise ValueError("patch spec is empty")
        for p in self.patches:
            if not (0 <= p.x0 < p.x1 <= width and 0 <= p.y0 < p.y1 <= height):
                raise ValueError(f"patch {p} lies outside the {height}x{width} image")

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            expected = ["x0", "y0", "x1", "y1", "R", "G", "B"]
            if reader.fieldnames != expected:
                raise ValueError(f"{path}: header must be {','.join(expected)}")
            patches = [Patch(int(r["x0"]), int(r["y0"]), int(r["x1"]), int(r["y1"]),
                             (float(r["R"]), float(r["G"]), float(r["B"])))
                       for r in reader]
        return cls(patches)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x0", "y0", "x1", "y1", "R", "G", "B"])
            for p in self.patches:
                writer.writerow([p.x0, p.y0, p.x1, p.y1, *p.rgb])


def chart_eval(img, patches, return_per_patch=False):
    """Mean CIEDE2000 between each patch's mean colour and its reference."""
    img = check_image(img, channels=3)
    patches.validate(*img.shape[:2])
    measured = np.array([img[p.y0:p.y1, p.x0:p.x1].reshape(-1, 3).mean(axis=0) for p in patches.patches])
    reference = np.array([p.rgb for p in patches.patches], dtype=np.float64)
    de = ciede2000(rgb_to_lab(measured), rgb_to_lab(reference))
    if return_per_patch:
        return float(de.mean()), de
    return float(de.mean())


@dataclass
class MetricReport:
    psnr: float = float("nan")
    ssim: float = float("nan")
    uciqe: float = float("nan")
    ciede2000_mean: float = float("nan")
    not_computed: tuple = ()

    def rows(self):
        return [(k, getattr(self, k)) for k in ("psnr", "ssim", "uciqe", "ciede2000_mean")
                if k not in self.not_computed]


def evaluate(img, reference=None, patches=None):
    """Compute every metric the inputs allow; skipped ones are listed in ``not_computed``."""
    img = check_image(img, channels=3)
    report = MetricReport(uciqe=uciqe(img))
    skipped = []
    if reference is not None:
        report.psnr = psnr(reference, img)
        if min(img.shape[:2]) >= _ssim.WIN:
            report.ssim = ssim(reference, img)
        else:
            skipped.append("ssim")
    else:
        skipped += ["psnr", "ssim"]
    if patches is not None:
        report.ciede2000_mean = chart_eval(img, patches)
    else:
        skipped.append("ciede2000_mean")
    report.not_computed = tuple(skipped)
    return report
