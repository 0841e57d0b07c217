"""Seeded synthetic scenes and an underwater-style degradation for demos and tests."""

import numpy as np


def make_scene(height=64, width=64, seed=0):
    """A smooth colourful test scene: gradients, a few discs and bars."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width] / np.array([max(height - 1, 1), max(width - 1, 1)])[:, None, None]
    img = np.stack([0.25 + 0.5 * xx, 0.3 + 0.4 * yy, 0.6 - 0.3 * xx * yy], axis=-1)
    for _ in range(4):
        cy, cx = rng.uniform(0.15, 0.85, size=2)
        r = rng.uniform(0.08, 0.2)
        color = rng.uniform(0.05, 0.95, size=3)
        mask = ((yy - cy) ** 2 + (xx - cx) ** 2) < r ** 2
        img[mask] = color
    for _ in range(2):
        x0 = rng.uniform(0.0, 0.8)
        mask = (xx > x0) & (xx < x0 + 0.08)
        img[mask] = 0.5 * img[mask] + 0.5 * rng.uniform(0.1, 0.9, size=3)
    return np.clip(img, 0.0, 1.0)


def degrade_underwater(img, seed=0, transmission=(0.55, 0.8, 0.85), veil=(0.05, 0.35, 0.45), noise=0.01):
    """Wavelength-dependent attenuation plus backscatter veil, a 3x3 box blur and noise."""
    rng = np.random.default_rng(seed)
    t = np.asarray(transmission)
    out = img * t + np.asarray(veil) * (1 - t)
    p = np.pad(out, ((1, 1), (1, 1), (0, 0)), mode="edge")
    h, w = img.shape[:2]
    out = sum(p[i:i + h, j:j + w] for i in range(3) for j in range(3)) / 9.0
    out = out + noise * rng.standard_normal(out.shape)
    return np.clip(out, 0.0, 1.0)
