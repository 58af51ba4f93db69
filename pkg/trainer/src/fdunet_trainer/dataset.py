"""Reader for the dataset container format.

The format is the wire contract with the simulation toolkit: a
directory holding manifest.json (version, dtype tag, tensor records,
metadata) and one raw little-endian float32 blob per tensor, C order.
This module re-implements the reader from that contract on purpose;
it must not share code with the producer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SUPPORTED_VERSION = 1
SUPPORTED_DTYPE = "f32le"


class FormatError(Exception):
    """Container violates the manifest contract."""


@dataclass
class Container:
    tensors: dict[str, np.ndarray]
    roles: dict[str, str]
    metadata: dict

    def first_by_role(self, role: str) -> np.ndarray:
        for name, r in self.roles.items():
            if r == role:
                return self.tensors[name]
        raise FormatError(f"container has no tensor with role {role!r}")


def read_container(path: str | Path) -> Container:
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.is_file():
        raise FormatError(f"no manifest.json under {path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"unreadable manifest: {exc}") from exc

    for key in ("version", "dtype", "tensors", "metadata"):
        if key not in manifest:
            raise FormatError(f"manifest missing {key!r}")
    if manifest["version"] != SUPPORTED_VERSION:
        raise FormatError(f"unsupported version {manifest['version']}")
    if manifest["dtype"] != SUPPORTED_DTYPE:
        raise FormatError(f"unsupported dtype {manifest['dtype']}")

    tensors: dict[str, np.ndarray] = {}
    roles: dict[str, str] = {}
    for rec in manifest["tensors"]:
        try:
            name, shape, fname, role = rec["name"], rec["shape"], rec["file"], rec["role"]
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad tensor record {rec!r}") from exc
        blob = (path / fname).read_bytes()
        count = int(np.prod(shape))
        if len(blob) != 4 * count:
            raise FormatError(f"{fname}: {len(blob)} bytes for shape {shape}")
        tensors[name] = np.frombuffer(blob, dtype="<f4").reshape(shape).copy()
        roles[name] = role
    return Container(tensors=tensors, roles=roles, metadata=manifest["metadata"])


def load_pairs(path: str | Path) -> tuple[np.ndarray, np.ndarray, dict]:
    """(inputs, targets, metadata) for a training/testing container."""
    c = read_container(path)
    inputs = c.first_by_role("input")
    targets = c.first_by_role("target")
    if inputs.shape[0] != targets.shape[0]:
        raise FormatError(
            f"{inputs.shape[0]} inputs but {targets.shape[0]} targets"
        )
    if inputs.ndim != 4 or targets.ndim != 3:
        raise FormatError("expected inputs (N, C, H, W) and targets (N, H, W)")
    return inputs, targets, c.metadata


def scale_inputs(inputs: np.ndarray) -> np.ndarray:
    """Per-sample, per-channel max-abs normalization of network inputs.

    Raw simulated amplitudes vary with phantom content, sensor count,
    and sensor position (near-sensor pixels dominate interpolation
    tensors); scaling each channel keeps every input map on a unit
    range without touching the dataset on disk.
    """
    flat = np.abs(inputs.reshape(inputs.shape[0], inputs.shape[1], -1)).max(axis=2)
    flat = np.where(flat > 0, flat, 1.0).astype(inputs.dtype)
    return inputs / flat[:, :, None, None]


def stack_features(inputs: np.ndarray) -> np.ndarray:
    """Append coherent-sum statistics to multi-channel inputs.

    For per-sensor interpolation tensors the coherent mean, the
    coherence-factor-weighted mean, and the RMS across channels are the
    classic delay-and-sum beamforming composites; giving them to the
    network explicitly saves it from spending its training budget
    rediscovering them.  Single-channel inputs pass through unchanged.
    """
    if inputs.shape[1] == 1:
        return inputs
    das = inputs.mean(axis=1, keepdims=True)
    energy = (inputs ** 2).mean(axis=1, keepdims=True)
    coherence = das ** 2 / (energy + 1e-12)
    extras = [das, coherence * das, np.sqrt(energy)]
    return np.concatenate([inputs] + extras, axis=1).astype(inputs.dtype)
