"""Independent reference implementations used as test oracles.

Everything here is deliberately written the slow, obvious way (plain
loops, separate algorithms) and must stay independent of the library
code paths it checks.
"""

import math

import numpy as np


def spectral_oneshot(p0: np.ndarray, dx: float, c: float, t: float) -> np.ndarray:
    """Direct evaluation of the wave field at time t from p(0)=p0,
    dp/dt(0)=0 on a periodic grid, via the full complex FFT."""
    h, w = p0.shape
    ky = 2.0 * np.pi * np.fft.fftfreq(h, d=dx)
    kx = 2.0 * np.pi * np.fft.fftfreq(w, d=dx)
    kmag = np.sqrt(ky[:, None] ** 2 + kx[None, :] ** 2)
    return np.real(np.fft.ifft2(np.fft.fft2(p0) * np.cos(c * kmag * t)))


def inner_product(a: np.ndarray, b: np.ndarray) -> float:
    """Accumulate the inner product with compensated summation."""
    return math.fsum((a.ravel() * b.ravel()).tolist())


def delay_and_sum(y: np.ndarray, positions: np.ndarray, shape, dx: float,
                  c: float, dt: float) -> np.ndarray:
    """Naive loop backprojection: for each pixel sum every sensor's trace
    linearly interpolated at that pixel's flight time."""
    n_sensors, n_t = y.shape
    out = np.zeros(shape)
    for i in range(shape[0]):
        for j in range(shape[1]):
            acc = 0.0
            for s in range(n_sensors):
                si, sj = positions[s]
                u = math.hypot(i - si, j - sj) * dx / c / dt
                k = math.floor(u)
                frac = u - k
                if k + 1 <= n_t - 1:
                    acc += (1.0 - frac) * y[s, k] + frac * y[s, k + 1]
                elif u <= n_t - 1:  # u == n_t - 1 exactly
                    acc += y[s, n_t - 1]
            out[i, j] = acc
    return out


def bilinear_reference(mat: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Loop bilinear resize with corner-aligned edge-clamped sampling."""
    in_h, in_w = mat.shape
    out = np.zeros((out_h, out_w))
    for i in range(out_h):
        for j in range(out_w):
            si = i * (in_h - 1) / (out_h - 1)
            sj = j * (in_w - 1) / (out_w - 1)
            i0, j0 = int(math.floor(si)), int(math.floor(sj))
            i1, j1 = min(i0 + 1, in_h - 1), min(j0 + 1, in_w - 1)
            fi, fj = si - i0, sj - j0
            out[i, j] = (
                (1 - fi) * (1 - fj) * mat[i0, j0]
                + (1 - fi) * fj * mat[i0, j1]
                + fi * (1 - fj) * mat[i1, j0]
                + fi * fj * mat[i1, j1]
            )
    return out


def ssim_reference(a: np.ndarray, b: np.ndarray) -> float:
    """Independent SSIM via scikit-image configured to the standard
    11x11 sigma-1.5 Gaussian window definition."""
    from skimage.metrics import structural_similarity

    return structural_similarity(
        a, b, win_size=11, gaussian_weights=True, sigma=1.5,
        use_sample_covariance=False, K1=0.01, K2=0.03, data_range=1.0,
    )


def make_subgrad_prox():
    """Numba-compiled brute-force subgradient descent for the TV prox.

    Returns a callable (v, weight, iters) -> best iterate.  Uses the
    strong-convexity step 2/(k+3) and tracks the best objective seen.
    """
    from numba import njit

    @njit(cache=True)
    def prox(v, w, iters):
        h, wd = v.shape
        u = v.copy()
        best = v.copy()
        fbest = 1e300
        g = np.zeros_like(v)
        for k in range(iters):
            for i in range(h):
                for j in range(wd):
                    g[i, j] = u[i, j] - v[i, j]
            for i in range(h):
                for j in range(wd):
                    gy = u[i + 1, j] - u[i, j] if i < h - 1 else 0.0
                    gx = u[i, j + 1] - u[i, j] if j < wd - 1 else 0.0
                    mag = math.sqrt(gy * gy + gx * gx)
                    if mag > 1e-12:
                        g[i, j] -= w * (gy + gx) / mag
                        if i < h - 1:
                            g[i + 1, j] += w * gy / mag
                        if j < wd - 1:
                            g[i, j + 1] += w * gx / mag
            step = 2.0 / (k + 3.0)
            for i in range(h):
                for j in range(wd):
                    u[i, j] -= step * g[i, j]
            f = 0.0
            for i in range(h):
                for j in range(wd):
                    gy = u[i + 1, j] - u[i, j] if i < h - 1 else 0.0
                    gx = u[i, j + 1] - u[i, j] if j < wd - 1 else 0.0
                    f += w * math.sqrt(gy * gy + gx * gx)
                    d = u[i, j] - v[i, j]
                    f += 0.5 * d * d
            if f < fbest:
                fbest = f
                for i in range(h):
                    for j in range(wd):
                        best[i, j] = u[i, j]
        return best

    return prox
