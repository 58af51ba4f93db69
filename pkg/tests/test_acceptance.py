"""End-to-end acceptance suite.

Each test exercises one release criterion at its stated tolerance and
prints a single PASS/FAIL line (run with -s to see them live).  The
suite is self-contained: expected values come from closed forms or
from the independent oracles in oracles.py, never from the code paths
under test.
"""

import math
import time

import numpy as np
import pytest

from oracles import delay_and_sum, inner_product, make_subgrad_prox, spectral_oneshot
from patrecon.datastore import DatasetContainer, read_dataset, write_dataset
from patrecon.geometry import Grid, Medium, make_sensor_array, time_of_flight
from patrecon.metrics import prepare_recon, psnr
from patrecon.phantoms import SyntheticPhantomSource
from patrecon.pixelwise import pixel_interpolate
from patrecon.recon import TvConfig, fista_tv, lipschitz_estimate, tv_prox_values
from patrecon.wavesim import (
    ImageField,
    Propagator,
    SensorData,
    adjoint,
    forward,
    make_sim_config,
    time_reversal,
)

GRID = Grid(128, 128, 1e-4)
MEDIUM = Medium()


def report(name: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def phantoms():
    source = SyntheticPhantomSource(7)
    return [source(i) for i in range(10)]


def tr_psnrs(phantom_list, n_sensors):
    sensors = make_sensor_array(GRID, n_sensors, 120)
    cfg = make_sim_config(GRID, sensors, MEDIUM)
    scores = []
    for ph in phantom_list:
        y = forward(ph, sensors, cfg, dtype=np.float32)
        rec = time_reversal(y, sensors, cfg, dtype=np.float32)
        scores.append(psnr(prepare_recon(rec.values), ph.values))
    return scores


def test_adjoint_correctness():
    grid = Grid(64, 64, 1e-4)
    sensors = make_sensor_array(grid, 32, 60)
    cfg = make_sim_config(grid, sensors, MEDIUM)
    rng = np.random.default_rng(2718)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        x = rng.standard_normal(grid.shape)
        y = rng.standard_normal((sensors.n_sensors, cfg.n_steps))
        ax = forward(ImageField(grid, x), sensors, cfg).values
        aty = adjoint(SensorData(y, cfg.dt), sensors, cfg).values
        lhs = inner_product(ax, y)
        rhs = inner_product(x, aty)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    elapsed = time.perf_counter() - t0
    report(
        "adjoint-correctness",
        worst < 1e-6 and elapsed < 120.0,
        f"max rel err {worst:.2e}, {elapsed:.1f}s for 20 trials",
    )


def test_propagator_exactness():
    # recursion against the one-shot spectral oracle on a 128x128 padded grid
    grid = Grid(64, 64, 1e-4)
    sensors = make_sensor_array(grid, 8, 48)
    cfg = make_sim_config(grid, sensors, MEDIUM, n_steps=10, pad_factor=2)
    prop = Propagator(grid, sensors, cfg)
    assert prop.padded == (128, 128)
    rng = np.random.default_rng(9)
    n = 200
    worst = 0.0
    for _ in range(3):
        p0 = rng.standard_normal(prop.padded)
        p_curr = p0
        p_prev = prop.kernel(p0)
        for _ in range(n):
            p_next = 2.0 * prop.kernel(p_curr) - p_prev
            p_prev, p_curr = p_curr, p_next
        expect = spectral_oneshot(p0, grid.dx, MEDIUM.sound_speed, n * cfg.dt)
        worst = max(worst, np.linalg.norm(p_curr - expect) / np.linalg.norm(expect))
    report("propagator-exactness", worst < 1e-10, f"max rel err {worst:.2e} over 3 fields")


def test_arrival_time_physics():
    sensors = make_sensor_array(GRID, 32, 120)
    cfg = make_sim_config(GRID, sensors, MEDIUM)
    rng = np.random.default_rng(55)
    worst = 0.0
    for _ in range(10):
        pixel = (int(rng.integers(20, 108)), int(rng.integers(20, 108)))
        s = int(rng.integers(0, sensors.n_sensors))
        x = np.zeros(GRID.shape)
        x[pixel] = 1.0
        y = forward(ImageField(GRID, x), sensors, cfg, dtype=np.float32)
        tof = time_of_flight(GRID, pixel, tuple(sensors.positions[s]), MEDIUM)
        peak = int(np.argmax(np.abs(y.values[s])))
        worst = max(worst, abs(peak * cfg.dt - tof))
    report(
        "arrival-time-physics",
        worst <= 2 * cfg.dt,
        f"worst offset {worst / cfg.dt:.2f} dt over 10 pairs",
    )


def test_sparsity_trend(phantoms):
    t0 = time.perf_counter()
    means = [float(np.mean(tr_psnrs(phantoms, n))) for n in (16, 32, 64)]
    elapsed = time.perf_counter() - t0
    report(
        "sparsity-trend",
        means[0] < means[1] < means[2] and elapsed < 900.0,
        f"TR PSNR {means[0]:.2f} -> {means[1]:.2f} -> {means[2]:.2f} dB, {elapsed:.0f}s",
    )


def test_iterative_gain(phantoms):
    sensors = make_sensor_array(GRID, 32, 120)
    cfg = make_sim_config(GRID, sensors, MEDIUM)
    lip = lipschitz_estimate(sensors, cfg, n_power_iters=12, seed=0, dtype=np.float32)
    tr_scores, tv_scores = [], []
    for ph in phantoms:
        y = forward(ph, sensors, cfg, dtype=np.float32)
        tr = time_reversal(y, sensors, cfg, dtype=np.float32)
        tr_scores.append(psnr(prepare_recon(tr.values), ph.values))
        res = fista_tv(
            y, sensors, cfg, TvConfig(n_outer=20, tol=0.0), lipschitz=lip, dtype=np.float32
        )
        tv_scores.append(psnr(prepare_recon(res.image.values), ph.values))
    gain = float(np.mean(tv_scores)) - float(np.mean(tr_scores))
    report(
        "iterative-gain",
        gain >= 3.0,
        f"fista {np.mean(tv_scores):.2f} dB vs tr {np.mean(tr_scores):.2f} dB "
        f"(gain {gain:.2f} dB over {len(phantoms)} phantoms)",
    )


def test_fista_monotonicity():
    worst = 0.0
    for seed in range(5):
        grid = Grid(24, 24, 1e-4)
        sensors = make_sensor_array(grid, 12, 18)
        cfg = make_sim_config(grid, sensors, MEDIUM)
        rng = np.random.default_rng(seed)
        x_true = np.clip(rng.uniform(-0.2, 1.0, grid.shape), 0, 1)
        y = forward(ImageField(grid, x_true), sensors, cfg)
        res = fista_tv(y, sensors, cfg, TvConfig(n_outer=15, tol=0.0))
        objs = np.array(res.objectives)
        rise = np.diff(objs) / np.maximum(np.abs(objs[:-1]), 1e-30)
        worst = max(worst, float(rise.max(initial=-np.inf)))
    report(
        "fista-monotonicity",
        worst <= 1e-9,
        f"largest relative objective rise {worst:.2e} over 5 problems",
    )


def test_tv_prox_oracle():
    closed = tv_prox_values(np.array([[0.0, 1.0]]), 0.25, n_inner=500)
    closed_err = np.abs(closed - np.array([[0.25, 0.75]])).max()

    prox_ref = make_subgrad_prox()
    rng = np.random.default_rng(3)
    worst = 0.0
    for weight in (0.05, 0.1, 0.08):
        v = rng.uniform(0, 1, (4, 4))
        ref = prox_ref(v, weight, 2_000_000)
        mine = tv_prox_values(v, weight, n_inner=3000)
        worst = max(worst, float(np.abs(ref - mine).max()))
    report(
        "tv-prox-oracle",
        closed_err <= 1e-10 and worst <= 1e-4,
        f"closed-form err {closed_err:.2e}, subgradient-oracle err {worst:.2e}",
    )


def test_pixel_interp_equivalence():
    grid = Grid(32, 32, 1e-4)
    sensors = make_sensor_array(grid, 6, 24)
    dt = 0.3 * grid.dx / MEDIUM.sound_speed
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(5):
        y = rng.standard_normal((6, 90))
        mine = pixel_interpolate(SensorData(y, dt), sensors, grid, MEDIUM).values.sum(axis=0)
        oracle = delay_and_sum(y, sensors.positions, grid.shape, grid.dx,
                               MEDIUM.sound_speed, dt)
        worst = max(worst, float(np.abs(mine - oracle).max()))
    report("pixel-interp-equivalence", worst <= 1e-12, f"max abs diff {worst:.2e}")


def test_speed_ratio():
    sensors = make_sensor_array(GRID, 64, 120)
    cfg = make_sim_config(GRID, sensors, MEDIUM)
    x = SyntheticPhantomSource(3)(0)
    y = forward(x, sensors, cfg, dtype=np.float32)

    t_px = min(
        _clock(lambda: pixel_interpolate(y, sensors, GRID, MEDIUM)) for _ in range(3)
    )
    t_tr = min(
        _clock(lambda: time_reversal(y, sensors, cfg, dtype=np.float32)) for _ in range(2)
    )
    t_tv = _clock(
        lambda: fista_tv(y, sensors, cfg, TvConfig(n_outer=50, tol=0.0), dtype=np.float32)
    )
    report(
        "speed-ratio",
        t_tv >= 100.0 * t_px and t_tr >= 10.0 * t_px,
        f"pixel {t_px * 1e3:.1f} ms, tr {t_tr:.2f} s ({t_tr / t_px:.0f}x), "
        f"fista50 {t_tv:.1f} s ({t_tv / t_px:.0f}x)",
    )


def _clock(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def test_io_roundtrip(tmp_path):
    rng = np.random.default_rng(77)
    c = DatasetContainer(metadata={"mode": "pixel", "split": "train", "seed": 1})
    c.add("inputs", rng.standard_normal((3, 4, 16, 16)).astype(np.float32), role="input")
    c.add("targets", rng.uniform(0, 1, (3, 16, 16)).astype(np.float32), role="target")
    c.add("one", np.array([1.0], dtype=np.float32), role="image")
    write_dataset(c, tmp_path / "ds")
    back = read_dataset(tmp_path / "ds")
    exact = (
        back.metadata == c.metadata
        and all(np.array_equal(back.tensors[k], c.tensors[k]) for k in c.tensors)
    )
    ieee = (tmp_path / "ds" / "one.bin").read_bytes() == bytes([0x00, 0x00, 0x80, 0x3F])
    report("io-roundtrip", exact and ieee, "bit-exact round trip, 1.0f -> 00 00 80 3f")
