"""Minimal command line: train on a dataset, predict chain documents."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .errors import NeuralEstimatorError
from .model import ModelConfig
from .training import (
    TrainConfig,
    baseline_direction_errors,
    predict_dataset,
    split_direction_errors,
    train,
)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="oksm-neural")
    sub = p.add_subparsers(dest="subcommand", required=True)

    t = sub.add_parser("train", help="train on a dataset's train split")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--epochs", type=int, default=50)
    t.add_argument("--batch-size", type=int, default=16)
    t.add_argument("--lr", type=float, default=2e-3)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--points-per-frame", type=int, default=128)
    t.add_argument("--frames", type=int, default=12)
    t.add_argument("--width", type=int, default=128)

    r = sub.add_parser("predict", help="write chain documents for a split")
    r.add_argument("--checkpoint", required=True)
    r.add_argument("--data", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--split", default="test")

    b = sub.add_parser("compare", help="model vs dataset-mean-axis baseline")
    b.add_argument("--data", required=True)
    b.add_argument("--pred", required=True)
    b.add_argument("--split", default="test")

    args = p.parse_args(argv)
    try:
        if args.subcommand == "train":
            model_config = ModelConfig(points_per_frame=args.points_per_frame,
                                       frames=args.frames, width=args.width)
            train_config = TrainConfig(epochs=args.epochs,
                                       batch_size=args.batch_size,
                                       learning_rate=args.lr, seed=args.seed)
            checkpoint, rows = train(args.data, args.out, model_config, train_config)
            print(f"checkpoint: {checkpoint}")
            print(f"final epoch loss: {rows[-1]['total']:.4f}")
        elif args.subcommand == "predict":
            written = predict_dataset(args.checkpoint, args.data, args.out,
                                      split=args.split)
            print(f"wrote {len(written)} chain documents to {args.out}")
        else:
            model = split_direction_errors(args.data, args.pred, split=args.split)
            base = baseline_direction_errors(args.data, split=args.split)
            print(f"model mean direction error:    {np.mean(model):7.3f} deg")
            print(f"baseline mean direction error: {np.mean(base):7.3f} deg")
        return 0
    except NeuralEstimatorError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
