"""Command-line front end; a thin client over the reconstruction service.

Every subcommand marshals its flags into a service request and writes
the response to disk.  By default the service runs in-process; pass
--server URL to target a running instance (see `patrecon serve`).

Environment overrides: PATRECON_DX and PATRECON_CFL replace the default
grid spacing (1e-4 m) and CFL number (0.3) for all subcommands.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .client import ServiceClient, ServiceError
from .datastore import load_tensor, save_tensor, write_pgm, write_png
from .schemas import TensorPayload

DEFAULT_DX = float(os.environ.get("PATRECON_DX", "1e-4"))
DEFAULT_CFL = float(os.environ.get("PATRECON_CFL", "0.3"))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--server", default=None, help="service URL; default runs in-process")


def _add_setup(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, default=128, help="grid side in pixels (default 128)")
    p.add_argument("--dx", type=float, default=DEFAULT_DX,
                   help=f"pixel size in meters (default {DEFAULT_DX:g}, env PATRECON_DX)")
    p.add_argument("--sound-speed", type=float, default=1500.0, help="m/s (default 1500)")
    p.add_argument("--density", type=float, default=1000.0, help="kg/m^3 (default 1000)")
    p.add_argument("--sensors", type=int, default=32, help="sensor count (default 32)")
    p.add_argument("--diameter", type=float, default=120.0,
                   help="sensor circle diameter in pixels (default 120)")
    p.add_argument("--aperture", choices=["semicircle", "full_ring"], default="semicircle")
    p.add_argument("--cfl", type=float, default=DEFAULT_CFL,
                   help=f"CFL number (default {DEFAULT_CFL:g}, env PATRECON_CFL)")
    p.add_argument("--steps", type=int, default=None, help="override recorded time samples")
    p.add_argument("--precision", choices=["single", "double"], default="single")


def _setup_payload(args) -> dict:
    return {
        "grid": {"height": args.grid, "width": args.grid, "dx": args.dx},
        "medium": {"sound_speed": args.sound_speed, "density": args.density},
        "n_sensors": args.sensors,
        "diameter_px": args.diameter,
        "aperture": args.aperture,
        "cfl": args.cfl,
        "n_steps": args.steps,
        "precision": args.precision,
    }


def _load_image(path: str) -> np.ndarray:
    p = Path(path)
    if p.suffix == ".bin":
        arr, _ = load_tensor(p)
        return arr
    from .datastore import load_grayscale_image

    return load_grayscale_image(p).values


def _write_image(path: str, arr: np.ndarray, meta: dict, pgm: bool, png: bool) -> None:
    save_tensor(Path(path), arr, meta)
    if pgm:
        write_pgm(Path(path).with_suffix(".pgm"), arr)
    if png:
        write_png(Path(path).with_suffix(".png"), arr)


def _previews(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pgm", action="store_true", help="also write an 8-bit PGM preview")
    p.add_argument("--png", action="store_true", help="also write an 8-bit PNG preview")


def cmd_generate(args, client: ServiceClient) -> int:
    resp = client.post("/datasets/generate", {
        "out_dir": args.out, "n_items": args.n, "seed": args.seed, "split": args.split,
        "grid": {"height": args.grid, "width": args.grid, "dx": args.dx},
    })
    print(f"wrote {resp['n_items']} phantoms to {resp['path']} ({resp['elapsed_s']:.1f}s)")
    return 0


def cmd_phantom(args, client: ServiceClient) -> int:
    resp = client.post("/phantom", {
        "seed": args.seed, "size": args.size,
        "augmented": not args.base, "draw_index": args.index,
    })
    arr = TensorPayload(**resp["image"]).to_array()
    _write_image(args.out, arr, {"kind": "phantom", "seed": args.seed}, args.pgm, args.png)
    print(f"phantom {arr.shape} -> {args.out}")
    return 0


def cmd_simulate(args, client: ServiceClient) -> int:
    image = _load_image(args.image)
    resp = client.post("/simulate", {
        "setup": _setup_payload(args),
        "image": TensorPayload.from_array(image).model_dump(),
    })
    y = TensorPayload(**resp["sensor_data"]).to_array()
    save_tensor(Path(args.out), y, {
        "kind": "sensor_data", "dt": resp["dt"], "n_steps": resp["n_steps"],
        "n_sensors": args.sensors, "aperture": args.aperture,
    })
    print(f"simulated {y.shape[0]}x{y.shape[1]} sensor data -> {args.out} "
          f"({resp['elapsed_s']:.2f}s)")
    return 0


def cmd_reconstruct(args, client: ServiceClient) -> int:
    y, _meta = load_tensor(Path(args.input))
    resp = client.post("/reconstruct", {
        "setup": _setup_payload(args),
        "sensor_data": TensorPayload.from_array(y).model_dump(),
        "method": args.method,
        "tv": {"lam": args.lam, "n_outer": args.outer, "n_inner": args.inner,
               "nonneg": not args.no_nonneg, "tol": args.tol},
    })
    img = TensorPayload(**resp["image"]).to_array()
    meta = {"kind": "reconstruction", "method": args.method, "n_sensors": args.sensors}
    if args.method == "tv":
        meta.update(lam=resp["lam"], n_iter=resp["n_iter"], converged=resp["converged"])
        if not resp["converged"]:
            print("note: TV solve stopped before reaching tolerance", file=sys.stderr)
    _write_image(args.out, img, meta, args.pgm, args.png)
    print(f"reconstructed ({args.method}) -> {args.out} ({resp['elapsed_s']:.2f}s)")
    return 0


def cmd_interpolate(args, client: ServiceClient) -> int:
    y, _meta = load_tensor(Path(args.input))
    resp = client.post("/interpolate", {
        "setup": _setup_payload(args),
        "sensor_data": TensorPayload.from_array(y).model_dump(),
        "mode": args.mode,
    })
    tensor = TensorPayload(**resp["tensor"]).to_array()
    save_tensor(Path(args.out), tensor, {"kind": f"interp_{args.mode}"})
    print(f"{args.mode} tensor {tensor.shape} -> {args.out} ({resp['elapsed_s']*1e3:.1f}ms)")
    return 0


def cmd_export(args, client: ServiceClient) -> int:
    resp = client.post("/datasets/export", {
        "setup": _setup_payload(args),
        "out_dir": args.out, "mode": args.mode, "n_items": args.n,
        "seed": args.seed, "split": args.split,
    })
    print(f"exported {resp['n_items']} {args.mode} pairs to {resp['path']} "
          f"({resp['elapsed_s']:.1f}s)")
    return 0


def _fmt(x) -> str:
    if x is None:
        return "inf"
    return f"{x:.6g}"


def cmd_evaluate(args, client: ServiceClient) -> int:
    resp = client.post("/evaluate", {
        "recon_path": args.recon, "gt_path": args.gt, "protocol": args.protocol,
        "method": args.method, "n_sensors": args.sensors,
    })
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "method", "n_sensors", "psnr_db", "ssim"])
        for row in resp["rows"]:
            writer.writerow([row["id"], row["method"], row["n_sensors"],
                             _fmt(row["psnr_db"]), f"{row['ssim']:.6g}"])
        psnr_cell = ("inf" if resp["psnr_mean"] is None
                     else f"{resp['psnr_mean']:.2f}±{resp['psnr_std']:.2f}")
        ssim_cell = f"{resp['ssim_mean']:.2f}±{resp['ssim_std']:.2f}"
        writer.writerow(["summary", args.method, args.sensors, psnr_cell, ssim_cell])
    print(f"evaluated {len(resp['rows'])} images -> {args.out} "
          f"(psnr {psnr_cell}, ssim {ssim_cell})")
    return 0


def cmd_bench(args, client: ServiceClient) -> int:
    resp = client.post("/bench", {
        "setup": _setup_payload(args), "seed": args.seed,
        "tv_outer": args.tv_iters, "repeats": args.repeats,
    })
    rows = resp["rows"]
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "seconds_per_frame"])
        for row in rows:
            writer.writerow([row["stage"], f"{row['seconds_per_frame']:.6g}"])
    for row in rows:
        print(f"{row['stage']:>22s}: {row['seconds_per_frame']*1e3:10.2f} ms")
    return 0


def cmd_serve(args, _client=None) -> int:
    import uvicorn

    uvicorn.run("patrecon.service:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patrecon",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a dataset of synthetic phantoms")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", choices=["train", "test"], default="train")
    p.add_argument("--grid", type=int, default=128)
    p.add_argument("--dx", type=float, default=DEFAULT_DX)
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("phantom", help="write a single phantom image")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=340)
    p.add_argument("--index", type=int, default=0, help="augmentation draw index")
    p.add_argument("--base", action="store_true", help="emit the raw base phantom, no crop")
    _previews(p)
    _add_common(p)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("simulate", help="forward-simulate sensor data from an image")
    p.add_argument("--image", required=True, help=".bin tensor or grayscale image file")
    p.add_argument("--out", required=True)
    _add_setup(p)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="reconstruct an image from sensor data")
    p.add_argument("--input", required=True, help="sensor data .bin")
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=["tr", "tv"], default="tr")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="TV weight (default scales to the data)")
    p.add_argument("--outer", type=int, default=50)
    p.add_argument("--inner", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--no-nonneg", action="store_true")
    _previews(p)
    _add_setup(p)
    _add_common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("interpolate", help="map sensor data into image space")
    p.add_argument("--input", required=True, help="sensor data .bin")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["pixel", "mdirect"], default="pixel")
    _add_setup(p)
    _add_common(p)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("export", help="export CNN training pairs")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["post", "pixel", "mdirect"], required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", choices=["train", "test"], default="train")
    _add_setup(p)
    _add_common(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("evaluate", help="PSNR/SSIM table for recon vs ground truth")
    p.add_argument("--recon", required=True, help="container dir or dir of .bin images")
    p.add_argument("--gt", required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--protocol", choices=["clip", "norm", "raw"], default="clip")
    p.add_argument("--method", default="unknown", help="method label for the CSV")
    p.add_argument("--sensors", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="per-stage wall-clock timings")
    p.add_argument("--out", default="bench.csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tv-iters", type=int, default=50)
    p.add_argument("--repeats", type=int, default=3)
    _add_setup(p)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve, server=None)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve":
        return args.func(args)
    from .errors import PatReconError

    try:
        with ServiceClient(args.server) as client:
            return args.func(args, client)
    except (ServiceError, PatReconError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
