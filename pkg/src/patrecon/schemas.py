"""Pydantic request/response models for the reconstruction service.

Arrays cross the wire as base64-encoded little-endian float32 with an
explicit shape, mirroring the on-disk dataset format.
"""

from __future__ import annotations

import base64
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from .geometry import Grid, Medium, SensorArray, make_sensor_array
from .wavesim import SimConfig, make_sim_config


class TensorPayload(BaseModel):
    shape: list[int]
    data_b64: str

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "TensorPayload":
        arr = np.ascontiguousarray(arr, dtype="<f4")
        return cls(shape=list(arr.shape), data_b64=base64.b64encode(arr.tobytes()).decode())

    def to_array(self) -> np.ndarray:
        raw = base64.b64decode(self.data_b64)
        n = int(np.prod(self.shape)) if self.shape else 1
        if len(raw) != 4 * n:
            raise ValueError(f"payload has {len(raw)} bytes for shape {self.shape}")
        return np.frombuffer(raw, dtype="<f4").reshape(self.shape).astype(np.float64)


class GridSpec(BaseModel):
    height: int = 128
    width: int = 128
    dx: float = 1e-4

    def build(self) -> Grid:
        return Grid(self.height, self.width, self.dx)


class MediumSpec(BaseModel):
    sound_speed: float = 1500.0
    density: float = 1000.0

    def build(self) -> Medium:
        return Medium(self.sound_speed, self.density)


class SetupSpec(BaseModel):
    """Full imaging setup: grid, medium, sensor array, stepping."""

    grid: GridSpec = GridSpec()
    medium: MediumSpec = MediumSpec()
    n_sensors: int = 32
    diameter_px: float = 120.0
    aperture: Literal["semicircle", "full_ring"] = "semicircle"
    cfl: float = 0.3
    n_steps: Optional[int] = None
    pad_factor: Optional[int] = None
    precision: Literal["single", "double"] = "single"

    def build(self) -> tuple[Grid, Medium, SensorArray, SimConfig]:
        grid = self.grid.build()
        medium = self.medium.build()
        sensors = make_sensor_array(grid, self.n_sensors, self.diameter_px, self.aperture)
        cfg = make_sim_config(
            grid, sensors, medium, cfl=self.cfl, n_steps=self.n_steps, pad_factor=self.pad_factor
        )
        return grid, medium, sensors, cfg

    @property
    def dtype(self):
        return np.float32 if self.precision == "single" else np.float64


class HealthResponse(BaseModel):
    status: str
    version: str


class PhantomRequest(BaseModel):
    seed: int = 0
    size: int = 340
    augmented: bool = True
    draw_index: int = 0
    crop_size: int = 128


class ImageResponse(BaseModel):
    image: TensorPayload


class SimulateRequest(BaseModel):
    setup: SetupSpec = SetupSpec()
    image: TensorPayload


class SimulateResponse(BaseModel):
    sensor_data: TensorPayload
    dt: float
    n_steps: int
    elapsed_s: float


class TvParams(BaseModel):
    lam: Optional[float] = None  # None scales to 1e-3 * max|A^T y|
    n_outer: int = 50
    n_inner: int = 20
    nonneg: bool = True
    tol: float = 1e-4


class ReconstructRequest(BaseModel):
    setup: SetupSpec = SetupSpec()
    sensor_data: TensorPayload
    method: Literal["tr", "tv"] = "tr"
    tv: TvParams = TvParams()


class ReconstructResponse(BaseModel):
    image: TensorPayload
    elapsed_s: float
    method: str
    converged: Optional[bool] = None
    n_iter: Optional[int] = None
    lam: Optional[float] = None
    objective_first: Optional[float] = None
    objective_last: Optional[float] = None


class InterpolateRequest(BaseModel):
    setup: SetupSpec = SetupSpec()
    sensor_data: TensorPayload
    mode: Literal["pixel", "mdirect"] = "pixel"


class InterpolateResponse(BaseModel):
    tensor: TensorPayload
    elapsed_s: float


class MetricsRequest(BaseModel):
    recon: TensorPayload
    gt: TensorPayload
    protocol: Literal["clip", "norm", "raw"] = "clip"
    peak: float = 1.0


class MetricsResponse(BaseModel):
    # infinite PSNR (identical images) travels as null; JSON has no inf
    psnr_db: Optional[float]
    ssim: float


class GenerateRequest(BaseModel):
    out_dir: str
    n_items: int = Field(ge=1)
    seed: int = 0
    split: Literal["train", "test"] = "train"
    grid: GridSpec = GridSpec()


class ExportRequest(BaseModel):
    setup: SetupSpec = SetupSpec()
    out_dir: str
    mode: Literal["post", "pixel", "mdirect"]
    n_items: int = Field(ge=1)
    seed: int = 0
    split: Literal["train", "test"] = "train"


class DatasetResponse(BaseModel):
    path: str
    n_items: int
    elapsed_s: float


class EvaluateRequest(BaseModel):
    recon_path: str
    gt_path: str
    protocol: Literal["clip", "norm", "raw"] = "clip"
    method: str = "unknown"
    n_sensors: int = 0


class MetricsRow(BaseModel):
    id: str
    method: str
    n_sensors: int
    psnr_db: Optional[float]
    ssim: float


class EvaluateResponse(BaseModel):
    rows: list[MetricsRow]
    psnr_mean: Optional[float]
    psnr_std: Optional[float]
    ssim_mean: float
    ssim_std: float


class BenchRequest(BaseModel):
    setup: SetupSpec = SetupSpec(n_sensors=64)
    seed: int = 0
    tv_outer: int = 50
    repeats: int = 3


class BenchRow(BaseModel):
    stage: str
    seconds_per_frame: float


class BenchResponse(BaseModel):
    rows: list[BenchRow]
