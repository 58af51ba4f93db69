"""Peak signal-to-noise ratio and structural similarity.

SSIM follows the original definition: 11x11 Gaussian window with
sigma 1.5, K1 = 0.01, K2 = 0.03, computed on the valid interior and
averaged.  The dynamic range defaults to 1.0 because toolkit images
are normalized to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class QualityReport:
    psnr_db: float
    ssim: float


def _as_images(recon, gt) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(getattr(recon, "values", recon), dtype=np.float64)
    b = np.asarray(getattr(gt, "values", gt), dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def psnr(recon, gt, peak: float = 1.0) -> float:
    """10 log10(peak^2 / MSE); +inf for identical images."""
    if peak <= 0:
        raise ValueError("peak must be positive")
    a, b = _as_images(recon, gt)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    w = np.exp(-(x ** 2) / (2.0 * sigma * sigma))
    return w / w.sum()


def _filter_valid(img: np.ndarray, win: np.ndarray) -> np.ndarray:
    # separable correlation restricted to fully-supported (valid) pixels
    from scipy.ndimage import correlate1d

    out = correlate1d(img, win, axis=0, mode="constant")
    out = correlate1d(out, win, axis=1, mode="constant")
    k = (len(win) - 1) // 2
    return out[k:-k, k:-k]


def ssim(recon, gt, dynamic_range: float = 1.0) -> float:
    """Mean local structural similarity over the valid window interior."""
    a, b = _as_images(recon, gt)
    if min(a.shape) < SSIM_WINDOW:
        raise DimensionMismatch(f"images must be at least {SSIM_WINDOW} px per side")
    win = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * dynamic_range) ** 2
    c2 = (SSIM_K2 * dynamic_range) ** 2

    mu_a = _filter_valid(a, win)
    mu_b = _filter_valid(b, win)
    mu_aa = _filter_valid(a * a, win)
    mu_bb = _filter_valid(b * b, win)
    mu_ab = _filter_valid(a * b, win)

    var_a = mu_aa - mu_a ** 2
    var_b = mu_bb - mu_b ** 2
    cov = mu_ab - mu_a * mu_b

    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def quality(recon, gt, peak: float = 1.0) -> QualityReport:
    return QualityReport(psnr_db=psnr(recon, gt, peak), ssim=ssim(recon, gt, peak))


def normalize_unit(img: np.ndarray) -> np.ndarray:
    """Min-max rescale to [0, 1]; flat images pass through unchanged."""
    img = np.asarray(img, dtype=np.float64)
    lo = float(img.min())
    hi = float(img.max())
    if hi == lo:
        return img.copy()
    return (img - lo) / (hi - lo)


PROTOCOLS = ("clip", "norm", "raw")


def prepare_recon(img: np.ndarray, protocol: str = "clip") -> np.ndarray:
    """Map a raw reconstruction onto the [0, 1] ground-truth scale.

    `clip` (default) clamps to the physical range of the normalized
    initial pressure; `norm` min-max rescales; `raw` compares as-is.
    """
    img = np.asarray(img, dtype=np.float64)
    if protocol == "clip":
        return np.clip(img, 0.0, 1.0)
    if protocol == "norm":
        return normalize_unit(img)
    if protocol == "raw":
        return img
    raise ValueError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")


def evaluate_pairs(
    recons, gts, protocol: str = "clip", peak: float = 1.0
) -> list[QualityReport]:
    """Per-image quality for matched reconstruction/ground-truth lists."""
    if len(recons) != len(gts):
        raise DimensionMismatch(f"{len(recons)} reconstructions for {len(gts)} references")
    reports = []
    for rec, gt in zip(recons, gts):
        r = prepare_recon(np.asarray(getattr(rec, "values", rec)), protocol)
        g = np.asarray(getattr(gt, "values", gt), dtype=np.float64)
        reports.append(QualityReport(psnr_db=psnr(r, g, peak), ssim=ssim(r, g, peak)))
    return reports
