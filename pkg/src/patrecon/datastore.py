"""On-disk dataset container and the training-pair export pipeline.

A container is a directory holding `manifest.json` plus one raw binary
blob per tensor.  Blobs are little-endian float32, row-major (C order,
channel-major for 3D tensors), so any language can reconstruct every
tensor from the manifest alone.  The same directory format is the wire
contract consumed by the CNN trainer.

Manifest layout (version 1):

    {
      "version": 1,
      "dtype": "f32le",
      "tensors": [{"name", "shape", "file", "role"}, ...],
      "metadata": {...}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .errors import CorruptManifest, DimensionMismatch, ShapeMismatch, UnsupportedVersion
from .geometry import Grid, Medium, SensorArray
from .pixelwise import pixel_interpolate, resize_sensor_data
from .wavesim import ImageField, SimConfig, forward, time_reversal

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1
DTYPE_TAG = "f32le"

MODE_POST = "post"
MODE_PIXEL = "pixel"
MODE_MDIRECT = "mdirect"
MODE_RAW = "raw"
EXPORT_MODES = (MODE_POST, MODE_PIXEL, MODE_MDIRECT)


@dataclass
class TensorRecord:
    name: str
    shape: tuple[int, ...]
    file: str
    role: str  # "input" | "target" | "image" | ...


@dataclass
class DatasetContainer:
    tensors: dict[str, np.ndarray] = dc_field(default_factory=dict)
    records: list[TensorRecord] = dc_field(default_factory=list)
    metadata: dict = dc_field(default_factory=dict)

    def add(self, name: str, values: np.ndarray, role: str) -> None:
        arr = np.ascontiguousarray(values, dtype="<f4")
        self.tensors[name] = arr
        self.records.append(
            TensorRecord(name=name, shape=tuple(arr.shape), file=f"{name}.bin", role=role)
        )

    def by_role(self, role: str) -> list[np.ndarray]:
        return [self.tensors[r.name] for r in self.records if r.role == role]


def write_dataset(container: DatasetContainer, path: str | Path) -> None:
    """Write manifest + tensor blobs; read_dataset(write_dataset(d)) == d."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    manifest = {
        "version": MANIFEST_VERSION,
        "dtype": DTYPE_TAG,
        "tensors": [
            {"name": r.name, "shape": list(r.shape), "file": r.file, "role": r.role}
            for r in container.records
        ],
        "metadata": container.metadata,
    }
    for rec in container.records:
        (path / rec.file).write_bytes(container.tensors[rec.name].tobytes(order="C"))
    (path / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2), encoding="utf-8")


def read_dataset(path: str | Path) -> DatasetContainer:
    path = Path(path)
    mpath = path / MANIFEST_NAME
    if not mpath.is_file():
        raise CorruptManifest(f"no {MANIFEST_NAME} in {path}")
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptManifest(str(exc)) from exc
    for key in ("version", "dtype", "tensors", "metadata"):
        if key not in manifest:
            raise CorruptManifest(f"manifest missing field {key!r}")
    if manifest["version"] != MANIFEST_VERSION:
        raise UnsupportedVersion(f"manifest version {manifest['version']}")
    if manifest["dtype"] != DTYPE_TAG:
        raise UnsupportedVersion(f"dtype {manifest['dtype']!r}")

    container = DatasetContainer(metadata=manifest["metadata"])
    for entry in manifest["tensors"]:
        try:
            name, shape, fname, role = (
                entry["name"],
                tuple(int(s) for s in entry["shape"]),
                entry["file"],
                entry["role"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptManifest(f"bad tensor record {entry!r}") from exc
        blob = (path / fname).read_bytes()
        expected = 4 * int(np.prod(shape))
        if len(blob) != expected:
            raise ShapeMismatch(f"{fname}: {len(blob)} bytes for shape {shape}")
        arr = np.frombuffer(blob, dtype="<f4").reshape(shape).copy()
        container.tensors[name] = arr
        container.records.append(TensorRecord(name=name, shape=shape, file=fname, role=role))
    return container


def save_tensor(path: str | Path, values: np.ndarray, meta: dict | None = None) -> None:
    """Single-tensor convenience format: raw f32le .bin + JSON sidecar."""
    path = Path(path)
    arr = np.ascontiguousarray(values, dtype="<f4")
    path.write_bytes(arr.tobytes(order="C"))
    sidecar = {"shape": list(arr.shape), "dtype": DTYPE_TAG}
    sidecar.update(meta or {})
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, indent=2), encoding="utf-8"
    )


def load_tensor(path: str | Path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    sidecar_path = path.with_suffix(path.suffix + ".json")
    if not sidecar_path.is_file():
        raise CorruptManifest(f"missing sidecar for {path}")
    meta = json.loads(sidecar_path.read_text(encoding="utf-8"))
    shape = tuple(int(s) for s in meta["shape"])
    blob = path.read_bytes()
    if len(blob) != 4 * int(np.prod(shape)):
        raise ShapeMismatch(f"{path}: {len(blob)} bytes for shape {shape}")
    return np.frombuffer(blob, dtype="<f4").reshape(shape).copy(), meta


def export_training_pairs(
    phantom_source,
    n_items: int,
    mode: str,
    sensors: SensorArray,
    sim_cfg: SimConfig,
    master_seed: int,
    split: str = "train",
    dtype=np.float32,
    progress=None,
) -> DatasetContainer:
    """Build (input, target) pairs for one learning mode.

    For each item: draw a phantom, simulate its sensor data, and compute
    the mode's network input (time-reversal image for post, per-sensor
    interpolation tensor for pixel, bilinear resize for mdirect).
    Deterministic in master_seed for a fixed phantom source.
    """
    if mode not in EXPORT_MODES:
        raise ValueError(f"mode must be one of {EXPORT_MODES}")
    if n_items < 1:
        raise ValueError("n_items must be >= 1")

    grid = sensors.grid
    medium = sim_cfg.medium
    inputs = []
    targets = []
    for i in range(n_items):
        x = phantom_source(i)
        if x.grid.shape != grid.shape:
            raise DimensionMismatch(
                f"phantom {x.grid.shape} does not match imaging grid {grid.shape}"
            )
        y = forward(x, sensors, sim_cfg, dtype=dtype)
        if mode == MODE_POST:
            inp = time_reversal(y, sensors, sim_cfg, dtype=dtype).values[None, :, :]
        elif mode == MODE_PIXEL:
            inp = pixel_interpolate(y, sensors, grid, medium).values
        else:
            inp = resize_sensor_data(y, grid.height, grid.width).values[None, :, :]
        inputs.append(np.asarray(inp, dtype=np.float32))
        targets.append(np.asarray(x.values, dtype=np.float32))
        if progress is not None:
            progress(i + 1, n_items)

    container = DatasetContainer(
        metadata={
            "mode": mode,
            "split": split,
            "n_items": n_items,
            "n_sensors": sensors.n_sensors,
            "aperture": sensors.aperture,
            "grid": [grid.height, grid.width],
            "dx": grid.dx,
            "dt": sim_cfg.dt,
            "n_steps": sim_cfg.n_steps,
            "sound_speed": medium.sound_speed,
            "density": medium.density,
            "seed": master_seed,
        }
    )
    container.add("inputs", np.stack(inputs), role="input")
    container.add("targets", np.stack(targets), role="target")
    return container


def export_phantoms(
    phantom_source,
    n_items: int,
    grid: Grid,
    master_seed: int,
    split: str = "train",
) -> DatasetContainer:
    """Container of ground-truth images only (mode `raw`)."""
    images = [np.asarray(phantom_source(i).values, dtype=np.float32) for i in range(n_items)]
    container = DatasetContainer(
        metadata={
            "mode": MODE_RAW,
            "split": split,
            "n_items": n_items,
            "grid": [grid.height, grid.width],
            "dx": grid.dx,
            "seed": master_seed,
        }
    )
    container.add("targets", np.stack(images), role="target")
    return container


def write_pgm(path: str | Path, image: np.ndarray) -> None:
    """8-bit binary PGM with min-max windowing, for quick inspection."""
    img = np.asarray(image, dtype=np.float64)
    lo, hi = float(img.min()), float(img.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    data = np.clip(np.rint((img - lo) * scale), 0, 255).astype(np.uint8)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + data.tobytes())


def write_png(path: str | Path, image: np.ndarray) -> None:
    """8-bit grayscale PNG with min-max windowing."""
    from PIL import Image

    img = np.asarray(image, dtype=np.float64)
    lo, hi = float(img.min()), float(img.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    data = np.clip(np.rint((img - lo) * scale), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(Path(path))


def load_grayscale_image(path: str | Path) -> ImageField:
    """Read an external grayscale image (PNG/PGM/TIFF/...) as a
    normalized [0, 1] field for use as an imported phantom base."""
    from PIL import Image

    with Image.open(Path(path)) as handle:
        data = np.asarray(handle.convert("F"), dtype=np.float64)
    lo, hi = float(data.min()), float(data.max())
    if hi > lo:
        data = (data - lo) / (hi - lo)
    return ImageField(grid=Grid(data.shape[0], data.shape[1]), values=data)
