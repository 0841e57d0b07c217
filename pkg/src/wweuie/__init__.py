"""Underwater image enhancement with white-balance, wavelet and gradient priors."""

from .colorspace import ciede2000, hvi_to_rgb, lab_to_rgb, rgb_to_hvi, rgb_to_lab, rgb_to_xyy
from .estimators import HaarWavelet, WhiteBalancePrior, WWEUIEEnhancer
from .image import load_image, resize_bilinear, save_image
from .losses import LossWeights, fit_image, grad_check, total_loss
from .metrics import chart_eval, psnr, ssim, uciqe
from .priors import fuse_wb, haar_dwt2, haar_idwt2, sobel_magnitude, white_balance

__version__ = "0.1.0"

__all__ = [
    "HaarWavelet", "LossWeights", "WWEUIEEnhancer", "WhiteBalancePrior", "chart_eval", "ciede2000",
    "fit_image", "fuse_wb", "grad_check", "haar_dwt2", "haar_idwt2", "hvi_to_rgb", "lab_to_rgb",
    "load_image", "psnr", "resize_bilinear", "rgb_to_hvi", "rgb_to_lab", "rgb_to_xyy", "save_image",
    "sobel_magnitude", "ssim", "total_loss", "uciqe", "white_balance",
]
