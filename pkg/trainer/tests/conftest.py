import json
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def write_container(path: Path, inputs: np.ndarray, targets: np.ndarray,
                    metadata: dict | None = None) -> Path:
    """Emit a dataset directory in the wire format, independent of the
    producer library."""
    path.mkdir(parents=True, exist_ok=True)
    inputs = np.ascontiguousarray(inputs, dtype="<f4")
    targets = np.ascontiguousarray(targets, dtype="<f4")
    (path / "inputs.bin").write_bytes(inputs.tobytes())
    (path / "targets.bin").write_bytes(targets.tobytes())
    manifest = {
        "version": 1,
        "dtype": "f32le",
        "tensors": [
            {"name": "inputs", "shape": list(inputs.shape), "file": "inputs.bin",
             "role": "input"},
            {"name": "targets", "shape": list(targets.shape), "file": "targets.bin",
             "role": "target"},
        ],
        "metadata": metadata or {"mode": "pixel", "n_sensors": inputs.shape[1]},
    }
    (path / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return path


@pytest.fixture
def tiny_pairs(tmp_path):
    """4 samples of 2-channel 32x32 inputs with matching targets."""
    rng = np.random.default_rng(5)
    inputs = rng.standard_normal((4, 2, 32, 32)).astype(np.float32)
    targets = rng.uniform(0, 1, (4, 32, 32)).astype(np.float32)
    return write_container(tmp_path / "pairs", inputs, targets)


@pytest.fixture
def rng():
    return np.random.default_rng(77)
