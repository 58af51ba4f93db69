"""FastAPI service exposing the reconstruction pipeline.

Single-image operations (simulate, reconstruct, interpolate, metrics)
move tensors inline; bulk dataset operations write container
directories on the server's filesystem and return their paths.  The
CLI consumes these endpoints through an in-process client by default.
"""

from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException

from . import __version__, schemas
from .datastore import (
    export_phantoms,
    export_training_pairs,
    read_dataset,
    write_dataset,
)
from .errors import PatReconError
from .metrics import evaluate_pairs, prepare_recon, psnr as psnr_fn, ssim as ssim_fn
from .phantoms import SyntheticPhantomSource, synth_vasculature
from .pixelwise import pixel_interpolate, resize_sensor_data
from .recon import TvConfig, fista_tv
from .wavesim import ImageField, SensorData, forward, time_reversal


def _fin(x: float) -> float | None:
    return None if math.isinf(x) else x


def _phantom_source(seed: int, grid) -> SyntheticPhantomSource:
    if grid.height != grid.width:
        raise PatReconError("synthetic phantom generation needs a square grid")
    base_size = max(340, int(2.7 * grid.height))
    return SyntheticPhantomSource(seed, base_size=base_size, crop_size=grid.height)


def load_images_any(path: str | Path) -> list[tuple[str, np.ndarray]]:
    """Images from either a dataset container (stacked target/input
    tensor) or a directory of single-tensor .bin files with sidecars."""
    from .datastore import MANIFEST_NAME, load_tensor

    path = Path(path)
    if (path / MANIFEST_NAME).is_file():
        container = read_dataset(path)
        for role in ("target", "image", "input"):
            stacks = container.by_role(role)
            if stacks:
                stack = stacks[0]
                return [(f"{i:05d}", stack[i]) for i in range(stack.shape[0])]
        raise PatReconError(f"container {path} holds no image tensors")
    pairs = []
    for f in sorted(path.glob("*.bin")):
        arr, _meta = load_tensor(f)
        pairs.append((f.stem, arr))
    if not pairs:
        raise PatReconError(f"no images found under {path}")
    return pairs


def create_app() -> FastAPI:
    app = FastAPI(title="patrecon", version=__version__)

    @app.exception_handler(PatReconError)
    async def _domain_error(_request, exc: PatReconError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(_request, exc: ValueError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/phantom", response_model=schemas.ImageResponse)
    def phantom(req: schemas.PhantomRequest):
        if req.augmented:
            source = SyntheticPhantomSource(req.seed, base_size=req.size)
            img = source(req.draw_index)
        else:
            img = synth_vasculature(req.seed, req.size)
        return schemas.ImageResponse(image=schemas.TensorPayload.from_array(img.values))

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(req: schemas.SimulateRequest):
        grid, _medium, sensors, cfg = req.setup.build()
        x = ImageField(grid=grid, values=req.image.to_array())
        t0 = time.perf_counter()
        y = forward(x, sensors, cfg, dtype=req.setup.dtype)
        return schemas.SimulateResponse(
            sensor_data=schemas.TensorPayload.from_array(y.values),
            dt=cfg.dt,
            n_steps=cfg.n_steps,
            elapsed_s=time.perf_counter() - t0,
        )

    @app.post("/reconstruct", response_model=schemas.ReconstructResponse)
    def reconstruct(req: schemas.ReconstructRequest):
        grid, _medium, sensors, cfg = req.setup.build()
        y = SensorData(values=req.sensor_data.to_array(), dt=cfg.dt)
        t0 = time.perf_counter()
        if req.method == "tr":
            img = time_reversal(y, sensors, cfg, dtype=req.setup.dtype)
            return schemas.ReconstructResponse(
                image=schemas.TensorPayload.from_array(img.values),
                elapsed_s=time.perf_counter() - t0,
                method="tr",
            )
        tv = TvConfig(
            lam=req.tv.lam,
            n_outer=req.tv.n_outer,
            n_inner=req.tv.n_inner,
            nonneg=req.tv.nonneg,
            tol=req.tv.tol,
        )
        result = fista_tv(y, sensors, cfg, tv, dtype=req.setup.dtype)
        return schemas.ReconstructResponse(
            image=schemas.TensorPayload.from_array(result.image.values),
            elapsed_s=time.perf_counter() - t0,
            method="tv",
            converged=result.converged,
            n_iter=result.n_iter,
            lam=result.lam,
            objective_first=result.objectives[0],
            objective_last=result.objectives[-1],
        )

    @app.post("/interpolate", response_model=schemas.InterpolateResponse)
    def interpolate(req: schemas.InterpolateRequest):
        grid, medium, sensors, cfg = req.setup.build()
        y = SensorData(values=req.sensor_data.to_array(), dt=cfg.dt)
        t0 = time.perf_counter()
        if req.mode == "pixel":
            tensor = pixel_interpolate(y, sensors, grid, medium).values
        else:
            tensor = resize_sensor_data(y, grid.height, grid.width).values
        return schemas.InterpolateResponse(
            tensor=schemas.TensorPayload.from_array(tensor),
            elapsed_s=time.perf_counter() - t0,
        )

    @app.post("/metrics", response_model=schemas.MetricsResponse)
    def metrics(req: schemas.MetricsRequest):
        rec = prepare_recon(req.recon.to_array(), req.protocol)
        gt = req.gt.to_array()
        return schemas.MetricsResponse(
            psnr_db=_fin(psnr_fn(rec, gt, req.peak)), ssim=ssim_fn(rec, gt, req.peak)
        )

    @app.post("/datasets/generate", response_model=schemas.DatasetResponse)
    def generate(req: schemas.GenerateRequest):
        t0 = time.perf_counter()
        grid = req.grid.build()
        source = _phantom_source(req.seed, grid)
        container = export_phantoms(source, req.n_items, grid, req.seed, split=req.split)
        write_dataset(container, req.out_dir)
        return schemas.DatasetResponse(
            path=str(Path(req.out_dir)), n_items=req.n_items,
            elapsed_s=time.perf_counter() - t0,
        )

    @app.post("/datasets/export", response_model=schemas.DatasetResponse)
    def export(req: schemas.ExportRequest):
        t0 = time.perf_counter()
        grid, _medium, sensors, cfg = req.setup.build()
        source = _phantom_source(req.seed, grid)
        container = export_training_pairs(
            source, req.n_items, req.mode, sensors, cfg, req.seed,
            split=req.split, dtype=req.setup.dtype,
        )
        write_dataset(container, req.out_dir)
        return schemas.DatasetResponse(
            path=str(Path(req.out_dir)), n_items=req.n_items,
            elapsed_s=time.perf_counter() - t0,
        )

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate(req: schemas.EvaluateRequest):
        recons = load_images_any(req.recon_path)
        gts = load_images_any(req.gt_path)
        if len(recons) != len(gts):
            raise HTTPException(
                status_code=422,
                detail=f"{len(recons)} reconstructions vs {len(gts)} references",
            )
        reports = evaluate_pairs(
            [r for _, r in recons], [g for _, g in gts], protocol=req.protocol
        )
        rows = [
            schemas.MetricsRow(
                id=rid, method=req.method, n_sensors=req.n_sensors,
                psnr_db=_fin(rep.psnr_db), ssim=rep.ssim,
            )
            for (rid, _), rep in zip(recons, reports)
        ]
        psnrs = np.array([rep.psnr_db for rep in reports])
        ssims = np.array([rep.ssim for rep in reports])
        has_inf = bool(np.isinf(psnrs).any())
        return schemas.EvaluateResponse(
            rows=rows,
            psnr_mean=None if has_inf else float(psnrs.mean()),
            psnr_std=None if has_inf else float(psnrs.std()),
            ssim_mean=float(ssims.mean()),
            ssim_std=float(ssims.std()),
        )

    @app.post("/bench", response_model=schemas.BenchResponse)
    def bench(req: schemas.BenchRequest):
        grid, medium, sensors, cfg = req.setup.build()
        x = _phantom_source(req.seed, grid)(0)
        y = forward(x, sensors, cfg, dtype=req.setup.dtype)

        def clock(fn) -> float:
            best = math.inf
            for _ in range(req.repeats):
                t0 = time.perf_counter()
                fn()
                best = min(best, time.perf_counter() - t0)
            return best

        t_fwd = clock(lambda: forward(x, sensors, cfg, dtype=req.setup.dtype))
        t_tr = clock(lambda: time_reversal(y, sensors, cfg, dtype=req.setup.dtype))
        t_px = clock(lambda: pixel_interpolate(y, sensors, grid, medium))
        t_md = clock(lambda: resize_sensor_data(y, grid.height, grid.width))
        tv = TvConfig(n_outer=req.tv_outer)
        t0 = time.perf_counter()
        fista_tv(y, sensors, cfg, tv, dtype=req.setup.dtype)
        t_tv = time.perf_counter() - t0
        return schemas.BenchResponse(
            rows=[
                schemas.BenchRow(stage="forward", seconds_per_frame=t_fwd),
                schemas.BenchRow(stage="time_reversal", seconds_per_frame=t_tr),
                schemas.BenchRow(stage="pixel_interpolate", seconds_per_frame=t_px),
                schemas.BenchRow(stage="resize_sensor_data", seconds_per_frame=t_md),
                schemas.BenchRow(stage=f"fista_tv_{req.tv_outer}it", seconds_per_frame=t_tv),
            ]
        )

    return app


app = create_app()
