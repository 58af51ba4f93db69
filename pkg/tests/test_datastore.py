import json

import numpy as np
import pytest

from patrecon.datastore import (
    DatasetContainer,
    export_phantoms,
    export_training_pairs,
    load_grayscale_image,
    load_tensor,
    read_dataset,
    save_tensor,
    write_dataset,
    write_pgm,
    write_png,
)
from patrecon.errors import CorruptManifest, ShapeMismatch, UnsupportedVersion
from patrecon.geometry import Grid
from patrecon.wavesim import ImageField


def random_container(rng):
    c = DatasetContainer(metadata={"mode": "raw", "split": "train", "seed": 3})
    c.add("inputs", rng.standard_normal((4, 2, 8, 8)).astype(np.float32), role="input")
    c.add("targets", rng.uniform(0, 1, (4, 8, 8)).astype(np.float32), role="target")
    return c


class TestRoundTrip:
    def test_bit_exact(self, tmp_path, rng):
        c = random_container(rng)
        write_dataset(c, tmp_path / "ds")
        back = read_dataset(tmp_path / "ds")
        assert back.metadata == c.metadata
        assert [r.__dict__ for r in back.records] == [r.__dict__ for r in c.records]
        for name in c.tensors:
            assert back.tensors[name].dtype == np.dtype("<f4")
            assert np.array_equal(back.tensors[name], c.tensors[name])

    def test_ieee754_byte_fixture(self, tmp_path):
        c = DatasetContainer(metadata={})
        c.add("one", np.array([1.0], dtype=np.float32), role="image")
        write_dataset(c, tmp_path / "ds")
        assert (tmp_path / "ds" / "one.bin").read_bytes() == bytes([0x00, 0x00, 0x80, 0x3F])

    def test_manifest_is_plain_json(self, tmp_path, rng):
        write_dataset(random_container(rng), tmp_path / "ds")
        manifest = json.loads((tmp_path / "ds" / "manifest.json").read_text())
        assert manifest["version"] == 1
        assert manifest["dtype"] == "f32le"
        assert {t["name"] for t in manifest["tensors"]} == {"inputs", "targets"}


class TestErrors:
    def test_missing_manifest(self, tmp_path):
        with pytest.raises(CorruptManifest):
            read_dataset(tmp_path)

    def test_unparseable_manifest(self, tmp_path):
        (tmp_path / "manifest.json").write_text("{not json")
        with pytest.raises(CorruptManifest):
            read_dataset(tmp_path)

    def test_missing_field(self, tmp_path):
        (tmp_path / "manifest.json").write_text(json.dumps({"version": 1, "dtype": "f32le"}))
        with pytest.raises(CorruptManifest):
            read_dataset(tmp_path)

    def test_unsupported_version(self, tmp_path, rng):
        write_dataset(random_container(rng), tmp_path)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        manifest["version"] = 99
        (tmp_path / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(UnsupportedVersion):
            read_dataset(tmp_path)

    def test_shape_mismatch(self, tmp_path):
        c = DatasetContainer(metadata={})
        c.add("m", np.zeros((2, 2), dtype=np.float32), role="image")
        write_dataset(c, tmp_path)
        # declare [2, 2] over a 12-byte file: 16 != 12
        (tmp_path / "m.bin").write_bytes(b"\x00" * 12)
        with pytest.raises(ShapeMismatch):
            read_dataset(tmp_path)


class TestSingleTensor:
    def test_sidecar_round_trip(self, tmp_path, rng):
        arr = rng.standard_normal((3, 5)).astype(np.float32)
        save_tensor(tmp_path / "t.bin", arr, {"kind": "test"})
        back, meta = load_tensor(tmp_path / "t.bin")
        assert np.array_equal(back, arr)
        assert meta["kind"] == "test"
        assert meta["shape"] == [3, 5]

    def test_missing_sidecar(self, tmp_path):
        (tmp_path / "t.bin").write_bytes(b"\x00" * 4)
        with pytest.raises(CorruptManifest):
            load_tensor(tmp_path / "t.bin")


class TestExport:
    def source(self, grid):
        def make(i):
            rng = np.random.default_rng(1000 + i)
            return ImageField(grid, rng.uniform(0, 1, grid.shape))

        return make

    def test_pixel_mode_shapes(self, setup_tiny):
        grid, _, sensors, cfg = setup_tiny
        c = export_training_pairs(self.source(grid), 3, "pixel", sensors, cfg, master_seed=5)
        assert c.tensors["inputs"].shape == (3, 8, 32, 32)
        assert c.tensors["targets"].shape == (3, 32, 32)
        assert c.metadata["mode"] == "pixel"
        assert c.metadata["n_sensors"] == 8

    def test_post_mode_single_channel(self, setup_tiny):
        grid, _, sensors, cfg = setup_tiny
        c = export_training_pairs(self.source(grid), 2, "post", sensors, cfg, master_seed=5)
        assert c.tensors["inputs"].shape == (2, 1, 32, 32)

    def test_mdirect_mode_single_channel(self, setup_tiny):
        grid, _, sensors, cfg = setup_tiny
        c = export_training_pairs(self.source(grid), 2, "mdirect", sensors, cfg, master_seed=5)
        assert c.tensors["inputs"].shape == (2, 1, 32, 32)

    def test_deterministic(self, setup_tiny, tmp_path):
        grid, _, sensors, cfg = setup_tiny
        a = export_training_pairs(self.source(grid), 2, "pixel", sensors, cfg, master_seed=9)
        b = export_training_pairs(self.source(grid), 2, "pixel", sensors, cfg, master_seed=9)
        write_dataset(a, tmp_path / "a")
        write_dataset(b, tmp_path / "b")
        for f in ("manifest.json", "inputs.bin", "targets.bin"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_targets_in_unit_range(self, setup_tiny):
        grid, _, sensors, cfg = setup_tiny
        c = export_training_pairs(self.source(grid), 3, "post", sensors, cfg, master_seed=5)
        t = c.tensors["targets"]
        assert t.min() >= 0.0 and t.max() <= 1.0

    def test_bad_mode(self, setup_tiny):
        grid, _, sensors, cfg = setup_tiny
        with pytest.raises(ValueError):
            export_training_pairs(self.source(grid), 1, "direct", sensors, cfg, master_seed=0)

    def test_export_phantoms_container(self, setup_tiny):
        grid, _, _, _ = setup_tiny
        c = export_phantoms(self.source(grid), 4, grid, master_seed=2, split="test")
        assert c.tensors["targets"].shape == (4, 32, 32)
        assert c.metadata["mode"] == "raw"
        assert c.metadata["split"] == "test"


class TestImages:
    def test_pgm_header_and_windowing(self, tmp_path, rng):
        img = rng.uniform(-1, 3, (10, 12))
        write_pgm(tmp_path / "x.pgm", img)
        raw = (tmp_path / "x.pgm").read_bytes()
        assert raw.startswith(b"P5\n12 10\n255\n")
        data = np.frombuffer(raw[raw.index(b"255\n") + 4:], dtype=np.uint8)
        assert data.min() == 0 and data.max() == 255

    def test_png_round_trip(self, tmp_path):
        img = np.linspace(0, 1, 64 * 64).reshape(64, 64)
        write_png(tmp_path / "x.png", img)
        back = load_grayscale_image(tmp_path / "x.png")
        assert back.grid.shape == (64, 64)
        assert np.abs(back.values - img).max() <= 1.0 / 255.0 + 1e-9
