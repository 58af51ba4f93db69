"""Pseudospectral propagation of the 2D lossless homogeneous wave equation.

The field update is the exact two-step recursion

    p_next = 2 * IFFT{ cos(c |k| dt) * FFT{p_curr} } - p_prev

on a periodic padded grid, which reproduces the continuous-in-time
solution of the wave equation for every grid-resolved mode.  Because
the n-step field is exactly IFFT{cos(c |k| n dt) * FFT{p0}}, the
forward map, its transpose, and time reversal can all be written in
terms of one spectral kernel application per time step.

Boundary handling uses no absorbing layer: the imaging grid is embedded
centered in a larger periodic grid and the simulation length is checked
against a no-wrap budget so that no periodic image of any source can
reach a sensor inside the recorded window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import irfft2, rfft2

from .errors import DimensionMismatch, WrapContamination
from .geometry import Grid, Medium, SensorArray

DEFAULT_CFL = 0.3
TIME_MARGIN = 1.2  # record tail margin over the longest flight time


@dataclass(frozen=True, eq=False)
class ImageField:
    """Real-valued field sampled on a grid (initial pressure or snapshot)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise DimensionMismatch(f"values {v.shape} != grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SimConfig:
    """Time stepping configuration; dt is derived as cfl * dx / c."""

    medium: Medium
    cfl: float
    dt: float
    n_steps: int
    pad_factor: int

    def __post_init__(self):
        if not (0 < self.cfl <= 1):
            raise ValueError("cfl must be in (0, 1]")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.pad_factor < 1:
            raise ValueError("pad_factor must be >= 1")


@dataclass(frozen=True, eq=False)
class SensorData:
    """(Ns, Nt) time-series pressure matrix with its sampling step."""

    values: np.ndarray = field(repr=False)
    dt: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise DimensionMismatch("sensor data must be 2D (sensors x time)")
        if not np.all(np.isfinite(v)):
            raise ValueError("sensor data contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def n_sensors(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]


def _axis_extents(grid: Grid, sensors: SensorArray) -> tuple[int, int]:
    # largest per-axis index separation between any pixel and any sensor
    si = sensors.positions[:, 0]
    sj = sensors.positions[:, 1]
    di = max(int(si.max()), grid.height - 1 - int(si.min()))
    dj = max(int(sj.max()), grid.width - 1 - int(sj.min()))
    return di, dj


def max_flight_distance_px(grid: Grid, sensors: SensorArray) -> float:
    """Longest pixel-to-sensor distance in pixels (corner pixels included)."""
    corners = np.array(
        [[0, 0], [0, grid.width - 1], [grid.height - 1, 0], [grid.height - 1, grid.width - 1]],
        dtype=np.float64,
    )
    d = corners[:, None, :] - sensors.positions[None, :, :].astype(np.float64)
    return float(np.sqrt((d ** 2).sum(axis=2)).max())


def wrap_budget_px(grid: Grid, sensors: SensorArray, pad_factor: int) -> float:
    """Shortest wrapped travel distance (pixels) from any pixel to any sensor."""
    di, dj = _axis_extents(grid, sensors)
    return float(min(pad_factor * grid.height - di, pad_factor * grid.width - dj))


def make_sim_config(
    grid: Grid,
    sensors: SensorArray,
    medium: Medium | None = None,
    cfl: float = DEFAULT_CFL,
    n_steps: int | None = None,
    pad_factor: int | None = None,
) -> SimConfig:
    """Build a SimConfig whose defaults record every pixel's full signal.

    n_steps defaults to ceil(1.2 * max flight distance / (c dt)).  The pad
    factor defaults to the smallest integer >= 2 whose no-wrap budget
    covers that duration; explicit values are validated at propagation
    time and raise WrapContamination when the budget is violated.
    """
    medium = medium or Medium()
    dt = cfl * grid.dx / medium.sound_speed
    if n_steps is None:
        n_steps = math.ceil(TIME_MARGIN * max_flight_distance_px(grid, sensors) / cfl)
    if pad_factor is None:
        pad_factor = 2
        while n_steps * cfl > wrap_budget_px(grid, sensors, pad_factor):
            pad_factor += 1
            if pad_factor > 16:
                raise ValueError("cannot satisfy no-wrap budget with sane padding")
    return SimConfig(medium=medium, cfl=cfl, dt=dt, n_steps=n_steps, pad_factor=pad_factor)


def _cos_kernel(shape: tuple[int, int], dx: float, c: float, dt: float) -> np.ndarray:
    """cos(c |k| dt) on the half-spectrum grid of an rfft2 of `shape`."""
    h, w = shape
    ky = 2.0 * np.pi * np.fft.fftfreq(h, d=dx)
    kx = 2.0 * np.pi * np.fft.rfftfreq(w, d=dx)
    kmag = np.sqrt(ky[:, None] ** 2 + kx[None, :] ** 2)
    return np.cos(c * kmag * dt)


def propagate_step(p_prev: ImageField, p_curr: ImageField, cfg: SimConfig) -> ImageField:
    """One exact step of the two-step spectral recursion on a periodic grid."""
    if p_prev.grid != p_curr.grid:
        raise DimensionMismatch("p_prev and p_curr must share a grid")
    grid = p_curr.grid
    cos_k = _cos_kernel(grid.shape, grid.dx, cfg.medium.sound_speed, cfg.dt)
    p_next = 2.0 * irfft2(rfft2(p_curr.values) * cos_k, s=grid.shape) - p_prev.values
    return ImageField(grid=grid, values=p_next)


class Propagator:
    """Shared machinery for forward, adjoint, and time-reversal runs.

    Precomputes the padded grid, the spectral cosine kernel, and the
    sensor indices on the padded grid, and performs the no-wrap check.
    dtype float32 halves the FFT cost for quality-level work (the same
    trade k-Wave makes by default); float64 is used wherever tests
    assert tight numerical bounds.
    """

    def __init__(self, grid: Grid, sensors: SensorArray, cfg: SimConfig, dtype=np.float64):
        if sensors.grid != grid:
            raise DimensionMismatch("sensor array was built for a different grid")
        budget = wrap_budget_px(grid, sensors, cfg.pad_factor)
        travel_px = cfg.n_steps * cfg.cfl
        if travel_px > budget:
            raise WrapContamination(
                f"travel {travel_px:.1f} px exceeds no-wrap budget {budget:.1f} px "
                f"(pad_factor={cfg.pad_factor}, n_steps={cfg.n_steps})"
            )
        self.grid = grid
        self.cfg = cfg
        self.dtype = np.dtype(dtype)
        self.padded = (cfg.pad_factor * grid.height, cfg.pad_factor * grid.width)
        self.off = ((self.padded[0] - grid.height) // 2, (self.padded[1] - grid.width) // 2)
        self.cos_k = _cos_kernel(self.padded, grid.dx, cfg.medium.sound_speed, cfg.dt).astype(
            self.dtype
        )
        self.si = sensors.positions[:, 0] + self.off[0]
        self.sj = sensors.positions[:, 1] + self.off[1]
        self.n_sensors = sensors.n_sensors

    def kernel(self, p: np.ndarray) -> np.ndarray:
        """Apply K = IFFT cos(c|k|dt) FFT; symmetric as a real operator."""
        return irfft2(rfft2(p) * self.cos_k, s=self.padded)

    def embed(self, x: np.ndarray) -> np.ndarray:
        p = np.zeros(self.padded, dtype=self.dtype)
        p[self.off[0]:self.off[0] + self.grid.height, self.off[1]:self.off[1] + self.grid.width] = x
        return p

    def crop(self, p: np.ndarray) -> np.ndarray:
        return p[
            self.off[0]:self.off[0] + self.grid.height,
            self.off[1]:self.off[1] + self.grid.width,
        ].copy()

    def run_forward(self, x: np.ndarray) -> np.ndarray:
        n_t = self.cfg.n_steps
        y = np.empty((self.n_sensors, n_t), dtype=self.dtype)
        p_curr = self.embed(x)
        # zero initial velocity: the field at t = -dt equals the field at
        # t = +dt, so the recursion can be seeded with one kernel call
        p_prev = self.kernel(p_curr)
        y[:, 0] = p_curr[self.si, self.sj]
        for n in range(1, n_t):
            p_next = 2.0 * self.kernel(p_curr) - p_prev
            y[:, n] = p_next[self.si, self.sj]
            p_prev, p_curr = p_curr, p_next
        return y

    def run_adjoint(self, y: np.ndarray) -> np.ndarray:
        # Exact transpose of run_forward.  The recorded sample at step n is
        # T_n(x) at the sensor nodes with T_n = cos(n * c|k|dt) applied
        # spectrally, a Chebyshev polynomial in the one-step kernel K; the
        # transpose sums T_n applied to data injected at the sensors, which
        # is Clenshaw's recurrence run backward in time.
        n_t = self.cfg.n_steps
        y = np.asarray(y, dtype=self.dtype)
        b = np.zeros(self.padded, dtype=self.dtype)
        b_next = np.zeros(self.padded, dtype=self.dtype)
        for n in range(n_t - 1, 0, -1):
            b_new = 2.0 * self.kernel(b) - b_next
            b_new[self.si, self.sj] += y[:, n]
            b_next, b = b, b_new
        z = self.kernel(b) - b_next
        z[self.si, self.sj] += y[:, 0]
        return self.crop(z)

    def run_time_reversal(self, y: np.ndarray) -> np.ndarray:
        n_t = self.cfg.n_steps
        y = np.asarray(y, dtype=self.dtype)
        p_prev = np.zeros(self.padded, dtype=self.dtype)
        p_curr = np.zeros(self.padded, dtype=self.dtype)
        p_curr[self.si, self.sj] = y[:, n_t - 1]
        for n in range(n_t - 2, -1, -1):
            p_next = 2.0 * self.kernel(p_curr) - p_prev
            p_next[self.si, self.sj] = y[:, n]
            p_prev, p_curr = p_curr, p_next
        return self.crop(p_curr)


def _check_data(y: SensorData, sensors: SensorArray, cfg: SimConfig) -> None:
    if y.n_sensors != sensors.n_sensors:
        raise DimensionMismatch(f"{y.n_sensors} traces for {sensors.n_sensors} sensors")
    if y.n_steps != cfg.n_steps:
        raise DimensionMismatch(f"{y.n_steps} samples for {cfg.n_steps} configured steps")


def forward(x: ImageField, sensors: SensorArray, cfg: SimConfig, dtype=np.float64) -> SensorData:
    """Simulate sensor traces from an initial pressure image."""
    prop = Propagator(x.grid, sensors, cfg, dtype=dtype)
    return SensorData(values=prop.run_forward(x.values.astype(dtype)), dt=cfg.dt)


def adjoint(y: SensorData, sensors: SensorArray, cfg: SimConfig, dtype=np.float64) -> ImageField:
    """Apply the exact transpose of the discrete forward map."""
    _check_data(y, sensors, cfg)
    prop = Propagator(sensors.grid, sensors, cfg, dtype=dtype)
    return ImageField(grid=sensors.grid, values=prop.run_adjoint(y.values))


def time_reversal(
    y: SensorData, sensors: SensorArray, cfg: SimConfig, dtype=np.float64
) -> ImageField:
    """Reconstruct by running the wave model backward while enforcing the
    measured pressures as Dirichlet values at the sensor nodes."""
    _check_data(y, sensors, cfg)
    prop = Propagator(sensors.grid, sensors, cfg, dtype=dtype)
    return ImageField(grid=sensors.grid, values=prop.run_time_reversal(y.values))
