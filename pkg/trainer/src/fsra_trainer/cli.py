"""Training command line: mirrors the TrainConfig fields."""

from __future__ import annotations

import argparse
import sys

from .training import TrainConfig, TrainingDiverged, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsra-train",
        description="Train per-edge weights for the unfolded activity detector")
    parser.add_argument("--dataset", required=True, help="exported dataset file")
    parser.add_argument("--out", required=True, help="weight file to write")
    parser.add_argument("--epochs", type=int, default=20)
    parser.add_argument("--batch-size", type=int, default=2000)
    parser.add_argument("--learning-rate", type=float, default=1e-3)
    parser.add_argument("--initial-weight", type=float, default=1.0)
    parser.add_argument("--loss", choices=("final", "multi"), default="multi")
    parser.add_argument("--val-fraction", type=float, default=0.1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--grad-clip", type=float, default=10.0)
    parser.add_argument("--max-samples", type=int, default=None,
                        help="use only the first N dataset records")
    parser.add_argument("--log", dest="log_path", default=None,
                        help="JSONL training log path (default: <out>.log)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = TrainConfig(dataset=args.dataset, out=args.out, epochs=args.epochs,
                         batch_size=args.batch_size,
                         learning_rate=args.learning_rate,
                         initial_weight=args.initial_weight, loss=args.loss,
                         val_fraction=args.val_fraction, seed=args.seed,
                         grad_clip=args.grad_clip, max_samples=args.max_samples,
                         log_path=args.log_path)
    try:
        train(config)
    except (TrainingDiverged, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
