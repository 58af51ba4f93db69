"""Command line for training and evaluating FD-UNet reconstruction models."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .dataset import FormatError
from .model import ChannelMismatch, ModelSpec
from .training import (
    TrainConfig,
    evaluate_model,
    infer,
    load_weights,
    save_weights,
    train,
    write_metrics_csv,
)


def cmd_train(args) -> int:
    cfg = TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch,
        epochs=args.epochs,
        seed=args.seed,
        spec=ModelSpec(init_features=args.features, growth=args.growth),
    )
    result = train(args.data, cfg)
    save_weights(result, args.out)
    print(f"trained {result.in_channels}-channel model on {args.data}; "
          f"final epoch MSE {result.loss_log[-1]:.3e} -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    model, payload = load_weights(args.weights)
    rows = evaluate_model(model, args.data)
    mode = payload.get("metadata", {}).get("mode", "cnn")
    n_sensors = payload.get("metadata", {}).get("n_sensors", 0)
    write_metrics_csv(rows, args.out, method=args.method or f"{mode}-dl",
                      n_sensors=n_sensors)
    psnrs = [r.psnr_db for r in rows]
    ssims = [r.ssim for r in rows]
    print(f"evaluated {len(rows)} images: psnr {np.mean(psnrs):.2f} "
          f"ssim {np.mean(ssims):.3f} -> {args.out}")
    return 0


def cmd_infer(args) -> int:
    import json

    model, _payload = load_weights(args.weights)
    meta = json.loads(Path(args.input + ".json").read_text())
    arr = np.frombuffer(Path(args.input).read_bytes(), dtype="<f4").reshape(meta["shape"])
    if arr.ndim == 2:
        arr = arr[None]
    out = infer(model, arr.astype(np.float32))
    Path(args.out).write_bytes(np.ascontiguousarray(out, dtype="<f4").tobytes())
    Path(args.out + ".json").write_text(
        json.dumps({"shape": list(out.shape), "dtype": "f32le"}, indent=2)
    )
    print(f"inferred {out.shape} -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdunet-trainer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on an exported dataset")
    p.add_argument("--data", required=True, help="dataset container directory")
    p.add_argument("--out", required=True, help="weights file (.pt)")
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--batch", type=int, default=3)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--features", type=int, default=32)
    p.add_argument("--growth", type=int, default=8)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="PSNR/SSIM table on a test container")
    p.add_argument("--data", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--method", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("infer", help="run one input tensor through a model")
    p.add_argument("--weights", required=True)
    p.add_argument("--input", required=True, help="raw f32le tensor with .json sidecar")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_infer)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, ChannelMismatch, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
