"""PSNR and SSIM, re-implemented to the same definitions as the
simulation toolkit's evaluator (11x11 Gaussian window, sigma 1.5,
K1 0.01, K2 0.03, dynamic range 1).  Agreement is pinned by shared
fixtures in the test suite; keep the definitions in lockstep."""

from __future__ import annotations

import math

import numpy as np

WINDOW = 11
SIGMA = 1.5
K1 = 0.01
K2 = 0.03


def psnr(recon: np.ndarray, gt: np.ndarray, peak: float = 1.0) -> float:
    recon = np.asarray(recon, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if recon.shape != gt.shape:
        raise ValueError(f"shape mismatch {recon.shape} vs {gt.shape}")
    mse = float(np.mean((recon - gt) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _window() -> np.ndarray:
    x = np.arange(WINDOW) - (WINDOW - 1) / 2.0
    w = np.exp(-(x ** 2) / (2.0 * SIGMA * SIGMA))
    return w / w.sum()


def _filter_valid(img: np.ndarray, w: np.ndarray) -> np.ndarray:
    # separable correlation, keeping only fully-covered output pixels
    tmp = np.apply_along_axis(lambda r: np.correlate(r, w, mode="valid"), 1, img)
    return np.apply_along_axis(lambda c: np.correlate(c, w, mode="valid"), 0, tmp)


def ssim(recon: np.ndarray, gt: np.ndarray, dynamic_range: float = 1.0) -> float:
    a = np.asarray(recon, dtype=np.float64)
    b = np.asarray(gt, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    w = _window()
    c1 = (K1 * dynamic_range) ** 2
    c2 = (K2 * dynamic_range) ** 2
    mu_a = _filter_valid(a, w)
    mu_b = _filter_valid(b, w)
    var_a = _filter_valid(a * a, w) - mu_a ** 2
    var_b = _filter_valid(b * b, w) - mu_b ** 2
    cov = _filter_valid(a * b, w) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def clip_unit(img: np.ndarray) -> np.ndarray:
    """Clamp a reconstruction onto the [0, 1] ground-truth scale."""
    return np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
