"""Pixel-wise time-of-flight interpolation of sensor data into image space.

Each sensor's time trace is mapped onto the reconstruction grid by
sampling it at the flight time from every pixel to that sensor, giving
an (Ns, H, W) tensor whose channel s depends only on sensor s.  This is
the input representation for the pixel-interpolation learning approach;
the plain bilinear resize of the raw sensor matrix used by the
direct-from-sensor-data variant lives here too.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .geometry import Grid, Medium, SensorArray
from .wavesim import ImageField, SensorData


@dataclass(frozen=True, eq=False)
class PixelInterpTensor:
    """(Ns, H, W) tensor of time-of-flight interpolated pressures."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 3 or v.shape[1:] != self.grid.shape:
            raise DimensionMismatch(f"tensor {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)

    @property
    def n_sensors(self) -> int:
        return self.values.shape[0]


def pixel_interpolate(
    y: SensorData,
    sensors: SensorArray,
    grid: Grid,
    medium: Medium,
    spreading_compensation: bool = False,
) -> PixelInterpTensor:
    """Map each trace onto the grid by linear interpolation at the
    per-pixel flight time; samples beyond the recorded window are zero.

    spreading_compensation optionally multiplies each pixel by the square
    root of its flight distance (in pixels) to undo 2D geometric decay;
    default off, the raw mapped values are what the CNN consumes.
    """
    if y.n_sensors != sensors.n_sensors:
        raise DimensionMismatch(f"{y.n_sensors} traces for {sensors.n_sensors} sensors")
    if y.dt <= 0:
        raise ValueError("sensor data dt must be positive")

    n_t = y.n_steps
    meters_per_px = grid.dx / medium.sound_speed
    ii = np.arange(grid.height, dtype=np.float64)[:, None]
    jj = np.arange(grid.width, dtype=np.float64)[None, :]
    out = np.empty((sensors.n_sensors, grid.height, grid.width))
    # one channel at a time keeps the gathers cache-resident
    for s, (si, sj) in enumerate(sensors.positions):
        u = np.hypot(ii - si, jj - sj) * meters_per_px / y.dt  # fractional sample
        idx0 = np.floor(u).astype(np.int64)
        frac = u - idx0
        np.clip(idx0, 0, n_t - 1, out=idx0)
        idx1 = np.minimum(idx0 + 1, n_t - 1)
        trace = y.values[s]
        vals = (1.0 - frac) * trace.take(idx0) + frac * trace.take(idx1)
        vals[u > n_t - 1] = 0.0  # beyond the recorded window
        if spreading_compensation:
            dist_px = u * (y.dt / meters_per_px)
            vals *= np.sqrt(np.maximum(dist_px, 1.0))
        out[s] = vals

    return PixelInterpTensor(grid=grid, values=out)


def bilinear_resize(mat: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Separable bilinear resize with corner-aligned, edge-clamped sampling."""
    in_h, in_w = mat.shape
    ri = np.linspace(0.0, in_h - 1.0, out_h)
    rj = np.linspace(0.0, in_w - 1.0, out_w)
    i0 = np.floor(ri).astype(np.int64)
    j0 = np.floor(rj).astype(np.int64)
    i1 = np.minimum(i0 + 1, in_h - 1)
    j1 = np.minimum(j0 + 1, in_w - 1)
    fi = (ri - i0)[:, None]
    fj = (rj - j0)[None, :]
    top = (1.0 - fj) * mat[i0][:, j0] + fj * mat[i0][:, j1]
    bot = (1.0 - fj) * mat[i1][:, j0] + fj * mat[i1][:, j1]
    return (1.0 - fi) * top + fi * bot


def resize_sensor_data(y: SensorData, out_h: int, out_w: int) -> ImageField:
    """Bilinearly resize the (Ns, Nt) matrix to image dimensions
    (sensor axis to rows, time axis to columns)."""
    if out_h < 2 or out_w < 2:
        raise ValueError("output dimensions must be at least 2")
    values = bilinear_resize(y.values, out_h, out_w)
    return ImageField(grid=Grid(out_h, out_w), values=values)
