"""Iterative reconstruction: least squares with an isotropic TV penalty,
solved by FISTA with a fast-gradient-projection proximal step.

The objective is ||y - A x||^2 + lambda * TV_iso(x) with A the spectral
forward operator.  The step size comes from a power-iteration estimate
of the largest eigenvalue of A^T A; momentum restarts whenever a step
would increase the objective, so the objective over accepted iterates
is non-increasing by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import SensorArray
from .wavesim import ImageField, Propagator, SensorData, SimConfig


@dataclass(frozen=True)
class TvConfig:
    """Regularization and iteration controls for fista_tv.

    lam=None scales the default weight to the data: 1e-3 * max|A^T y|.
    """

    lam: float | None = None
    n_outer: int = 50
    n_inner: int = 20
    nonneg: bool = True
    tol: float = 1e-4

    def __post_init__(self):
        if self.lam is not None and self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.n_outer < 1 or self.n_inner < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")


@dataclass
class FistaResult:
    image: ImageField
    objectives: list[float]
    converged: bool
    n_iter: int
    lam: float


def gradient(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward differences with replicate boundary (last row/col zero)."""
    gy = np.zeros_like(u)
    gx = np.zeros_like(u)
    gy[:-1, :] = u[1:, :] - u[:-1, :]
    gx[:, :-1] = u[:, 1:] - u[:, :-1]
    return gy, gx


def divergence(gy: np.ndarray, gx: np.ndarray) -> np.ndarray:
    """Exact negative transpose of `gradient`: <grad u, p> == -<u, div p>."""
    div = np.zeros_like(gy)
    if gy.shape[0] > 1:
        div[0, :] += gy[0, :]
        div[1:-1, :] += gy[1:-1, :] - gy[:-2, :]
        div[-1, :] += -gy[-2, :]
    if gx.shape[1] > 1:
        div[:, 0] += gx[:, 0]
        div[:, 1:-1] += gx[:, 1:-1] - gx[:, :-2]
        div[:, -1] += -gx[:, -2]
    return div


def tv_iso(u: np.ndarray) -> float:
    gy, gx = gradient(u)
    return float(np.sqrt(gy ** 2 + gx ** 2).sum())


def tv_prox_values(v: np.ndarray, weight: float, n_inner: int = 20) -> np.ndarray:
    """argmin_u 0.5||u - v||^2 + weight * TV_iso(u) by dual fast gradient
    projection (n_inner dual iterations from a zero dual start)."""
    if weight < 0:
        raise ValueError("weight must be nonnegative")
    if weight == 0.0:
        return v.copy()
    py = np.zeros_like(v)
    px = np.zeros_like(v)
    qy, qx = py.copy(), px.copy()
    t = 1.0
    step = 1.0 / (8.0 * weight)
    for _ in range(n_inner):
        u = v + weight * divergence(qy, qx)
        gy, gx = gradient(u)
        py_new = qy + step * gy
        px_new = qx + step * gx
        mag = np.maximum(1.0, np.sqrt(py_new ** 2 + px_new ** 2))
        py_new /= mag
        px_new /= mag
        t_new = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        beta = (t - 1.0) / t_new
        qy = py_new + beta * (py_new - py)
        qx = px_new + beta * (px_new - px)
        py, px, t = py_new, px_new, t_new
    return v + weight * divergence(py, px)


def tv_prox(v: ImageField, weight: float, n_inner: int = 20) -> ImageField:
    return ImageField(grid=v.grid, values=tv_prox_values(v.values, weight, n_inner))


def power_iteration(apply_normal, shape, n_iters: int, seed: int) -> float:
    """Largest-eigenvalue estimate of a PSD operator by power iteration.

    apply_normal maps an array of `shape` to another of the same shape.
    The returned Rayleigh-style estimate is monotone non-decreasing in
    the iteration count.
    """
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(shape)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(n_iters):
        w = apply_normal(x)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        est = nw
        x = w / nw
    return est


def lipschitz_estimate(
    sensors: SensorArray,
    cfg: SimConfig,
    n_power_iters: int = 15,
    seed: int = 0,
    dtype=np.float64,
) -> float:
    """Estimate the largest eigenvalue of A^T A for the configured setup."""
    prop = Propagator(sensors.grid, sensors, cfg, dtype=dtype)

    def normal_op(x):
        return prop.run_adjoint(prop.run_forward(x.astype(prop.dtype))).astype(np.float64)

    return power_iteration(normal_op, sensors.grid.shape, n_power_iters, seed)


def fista_tv(
    y: SensorData,
    sensors: SensorArray,
    sim_cfg: SimConfig,
    tv_cfg: TvConfig | None = None,
    lipschitz: float | None = None,
    dtype=np.float64,
) -> FistaResult:
    """TV-regularized reconstruction with monotone (restarted) FISTA."""
    tv_cfg = tv_cfg or TvConfig()
    prop = Propagator(sensors.grid, sensors, sim_cfg, dtype=dtype)
    y_vals = y.values.astype(prop.dtype)

    def A(x):
        return prop.run_forward(x)

    def At(r):
        return prop.run_adjoint(r)

    if lipschitz is None:
        lipschitz = lipschitz_estimate(sensors, sim_cfg, seed=0, dtype=dtype)
    if lipschitz <= 0:
        raise ValueError("lipschitz estimate must be positive")

    aty = At(y_vals)
    lam = tv_cfg.lam if tv_cfg.lam is not None else 1e-3 * float(np.abs(aty).max())

    def objective(x, ax):
        fid = float(((ax - y_vals) ** 2).sum())
        return fid + lam * tv_iso(x)

    def prox_step(point):
        g = At(A(point) - y_vals)
        cand = tv_prox_values(point - g / lipschitz, lam / lipschitz, tv_cfg.n_inner)
        if tv_cfg.nonneg:
            np.maximum(cand, 0.0, out=cand)
        return cand.astype(prop.dtype)

    x = np.zeros(sensors.grid.shape, dtype=prop.dtype)
    f_x = objective(x, A(x))
    z = x
    t = 1.0
    objectives = [f_x]
    converged = False
    n_done = 0

    for k in range(tv_cfg.n_outer):
        cand = prox_step(z)
        f_cand = objective(cand, A(cand))
        if f_cand > f_x:
            # momentum overshoot: restart from the last accepted iterate
            t = 1.0
            cand = prox_step(x)
            f_cand = objective(cand, A(cand))
            if f_cand > f_x:
                # step size too optimistic to make progress; keep x
                n_done = k + 1
                break
        t_new = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        z = cand + ((t - 1.0) / t_new) * (cand - x)
        rel_change = float(np.linalg.norm(cand - x)) / max(float(np.linalg.norm(x)), 1e-30)
        x, f_x, t = cand, f_cand, t_new
        objectives.append(f_x)
        n_done = k + 1
        if rel_change <= tv_cfg.tol:
            converged = True
            break

    return FistaResult(
        image=ImageField(grid=sensors.grid, values=x.astype(np.float64)),
        objectives=objectives,
        converged=converged,
        n_iter=n_done,
        lam=lam,
    )
