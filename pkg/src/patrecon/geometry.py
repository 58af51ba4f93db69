"""Grids, media, sensor arrays, and time-of-flight computation.

Conventions used throughout the toolkit:

* images are (H, W) arrays indexed [i, j] = [row, column];
* pixel (i, j) has physical center ((j + 0.5) * dx, (i + 0.5) * dx),
  so distances between pixel centers are plain index-space Euclidean
  distances scaled by dx;
* sensor arrays live on grid nodes (point detectors).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DuplicateSensor, OutOfGrid

APERTURE_SEMICIRCLE = "semicircle"
APERTURE_FULL_RING = "full_ring"


@dataclass(frozen=True)
class Grid:
    """Regular 2D pixel grid with square pixels of physical size dx."""

    height: int
    width: int
    dx: float = 1e-4

    def __post_init__(self):
        if self.height < 8 or self.width < 8:
            raise ValueError("grid must be at least 8x8")
        if self.dx <= 0:
            raise ValueError("dx must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)


@dataclass(frozen=True)
class Medium:
    """Homogeneous acoustic medium."""

    sound_speed: float = 1500.0
    density: float = 1000.0

    def __post_init__(self):
        if self.sound_speed <= 0 or self.density <= 0:
            raise ValueError("sound_speed and density must be positive")


@dataclass(frozen=True, eq=False)
class SensorArray:
    """Ordered point detectors on grid nodes, increasing in angle."""

    grid: Grid
    positions: np.ndarray = field(repr=False)  # (n, 2) int64 rows of (i, j)
    aperture: str = APERTURE_SEMICIRCLE

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.int64)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise ValueError("positions must be an (n, 2) array")
        object.__setattr__(self, "positions", pos)

    @property
    def n_sensors(self) -> int:
        return self.positions.shape[0]


def _snap(v: float) -> int:
    # nearest node, ties broken toward the smaller index
    return math.ceil(v - 0.5)


def make_sensor_array(
    grid: Grid,
    n_sensors: int,
    diameter_px: float,
    aperture: str = APERTURE_SEMICIRCLE,
) -> SensorArray:
    """Place n_sensors equally spaced in angle on a circle of the given
    pixel diameter centered on the grid, snapped to nearest grid nodes.

    Semicircle apertures span the upper half-plane measured from the +x
    axis with both endpoints included: theta_k = pi * k / (n - 1).
    Full rings use theta_k = 2 * pi * k / n.
    """
    if n_sensors < 2:
        raise ValueError("need at least 2 sensors")
    if diameter_px > min(grid.height, grid.width):
        raise ValueError("diameter exceeds grid size")
    if aperture not in (APERTURE_SEMICIRCLE, APERTURE_FULL_RING):
        raise ValueError(f"unknown aperture {aperture!r}")

    radius = diameter_px / 2.0
    if aperture == APERTURE_SEMICIRCLE:
        angles = [math.pi * k / (n_sensors - 1) for k in range(n_sensors)]
    else:
        angles = [2.0 * math.pi * k / n_sensors for k in range(n_sensors)]

    # grid center in continuous pixel-center coordinates; the -0.5 maps
    # physical position (x, y) back to fractional node index
    ci = grid.height / 2.0 - 0.5
    cj = grid.width / 2.0 - 0.5

    nodes = []
    seen = set()
    for theta in angles:
        # flush trig noise at multiples of pi/2 so ties break as documented
        di = radius * math.sin(theta)
        dj = radius * math.cos(theta)
        di = 0.0 if abs(di) < 1e-9 else di
        dj = 0.0 if abs(dj) < 1e-9 else dj
        i = _snap(ci + di)
        j = _snap(cj + dj)
        if not (0 <= i < grid.height and 0 <= j < grid.width):
            raise OutOfGrid(f"sensor at angle {theta:.4f} snapped to ({i}, {j})")
        if (i, j) in seen:
            raise DuplicateSensor(
                f"{n_sensors} sensors on diameter {diameter_px} collide at ({i}, {j})"
            )
        seen.add((i, j))
        nodes.append((i, j))

    return SensorArray(grid=grid, positions=np.array(nodes, dtype=np.int64), aperture=aperture)


def time_of_flight(
    grid: Grid,
    pixel: tuple[int, int],
    sensor_node: tuple[int, int],
    medium: Medium,
) -> float:
    """Straight-line propagation delay between two grid nodes, seconds."""
    for name, (i, j) in (("pixel", pixel), ("sensor_node", sensor_node)):
        if not (0 <= i < grid.height and 0 <= j < grid.width):
            raise OutOfGrid(f"{name} ({i}, {j}) outside grid")
    dist_px = math.hypot(pixel[0] - sensor_node[0], pixel[1] - sensor_node[1])
    return dist_px * grid.dx / medium.sound_speed


def flight_time_maps(grid: Grid, sensors: SensorArray, medium: Medium) -> np.ndarray:
    """(Ns, H, W) array of time-of-flight from every pixel to every sensor."""
    ii = np.arange(grid.height, dtype=np.float64)[:, None]
    jj = np.arange(grid.width, dtype=np.float64)[None, :]
    out = np.empty((sensors.n_sensors, grid.height, grid.width))
    for s, (si, sj) in enumerate(sensors.positions):
        out[s] = np.hypot(ii - si, jj - sj)
    out *= grid.dx / medium.sound_speed
    return out
