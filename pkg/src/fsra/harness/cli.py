"""Command-line experiment driver.

Subcommands: ``eer``, ``throughput``, ``robustness`` (sweeps writing CSV plus
a ``<out>.manifest.json`` sidecar), ``detect`` (one frame, or records of an
exported dataset), ``gen-dataset`` and ``plot``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..config import ConfigError, SystemConfig, load_config
from ..mpad import DetectorParams, detect, load_weights
from .dataset import export_dataset, iter_dataset
from .sweeps import DETECTORS, RunReport, SweepSpec, run_sweep


def _parse_sweep(text: str) -> tuple[str, list[str]]:
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected <param>=<v1,v2,...>")
    name, _, raw = text.partition("=")
    values = [v for v in raw.split(",") if v]
    if not values:
        raise argparse.ArgumentTypeError(f"sweep {name!r} has no values")
    return name, values


def _coerce_values(values: list[str]) -> list:
    out = []
    for v in values:
        try:
            out.append(int(v))
        except ValueError:
            out.append(float(v))
    return out


def _add_sweep_options(sub: argparse.ArgumentParser, default_param: str | None) -> None:
    sub.add_argument("--config", required=True, help="scenario file (flat YAML)")
    sub.add_argument("--frames", type=int, required=True, help="frames per sweep point")
    sub.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub.add_argument("--sweep", type=_parse_sweep, required=default_param is None,
                     default=None, metavar="PARAM=V1,V2,...",
                     help="swept config field and its values")
    sub.add_argument("--detector", choices=DETECTORS, default="mpad")
    sub.add_argument("--weights", default=None, help="weight file for mpad_weighted")
    sub.add_argument("--threshold", type=float, default=0.5,
                     help="baseline decision threshold")
    sub.add_argument("--calib-frames", type=int, default=0,
                     help="calibrate the baseline threshold on this many frames")
    sub.add_argument("--row-constraint", action="store_true",
                     help="apply the per-row decision to the detector output")
    sub.add_argument("--out", required=True, help="CSV output path")


def _run_sweep_command(args: argparse.Namespace, with_throughput: bool,
                       robustness: bool) -> int:
    config = load_config(args.config)
    if args.sweep is not None:
        param, values = args.sweep
    else:
        param, values = "channel_error_std", None
    if values is None:
        raise ConfigError("robustness needs --sweep channel_error_std=v1,v2,...")
    if robustness and param != "channel_error_std":
        raise ConfigError("robustness sweeps vary 'channel_error_std'")
    spec = SweepSpec(config=config, param=param, values=_coerce_values(values),
                     frames=args.frames, detector=args.detector,
                     weights_path=args.weights, threshold=args.threshold,
                     calibration_frames=args.calib_frames,
                     with_throughput=with_throughput,
                     row_constraint=args.row_constraint, seed=args.seed)
    report = run_sweep(spec)
    _write_report(report, args.out)
    print(f"wrote {args.out} ({len(report.points)} points)")
    return 0


def _write_report(report: RunReport, out: str) -> None:
    Path(out).write_text(report.csv_text())
    Path(f"{out}.manifest.json").write_text(json.dumps(report.manifest, indent=2) + "\n")


def _detect_command(args: argparse.Namespace) -> int:
    weights = load_weights(args.weights) if args.weights else None
    if args.from_dataset:
        header, records = iter_dataset(args.from_dataset)
        config = SystemConfig(**header.config)
        start, stop = _parse_records(args.records, header.count)
        params = DetectorParams(iterations=config.iterations)
        for index, record in enumerate(records):
            if index >= stop:
                break
            if index < start:
                continue
            result = detect(record.y, record.h_csi, config, params=params,
                            weights=weights)
            _emit_result(result, args.json, index)
        return 0

    config = load_config(args.config)
    if args.seed is not None:
        config = config.replace(rng_seed=args.seed)
    from ..model import frame_streams, synthesize_frame
    frame = synthesize_frame(config, frame_streams(config.rng_seed, 0, 0))
    result = detect(frame.stacked.y, frame.stacked.h_csi, config, weights=weights)
    _emit_result(result, args.json, 0, truth=frame.indicators)
    return 0


def _parse_records(text: str, count: int) -> tuple[int, int]:
    if text == "all":
        return 0, count
    if ":" in text:
        a, _, b = text.partition(":")
        return int(a or 0), min(int(b or count), count)
    index = int(text)
    return index, index + 1


def _emit_result(result, as_json: bool, index: int, truth=None) -> None:
    if as_json:
        doc = {"record": index, "s_hat": result.s_hat.tolist(),
               "llr": result.llr.tolist()}
        if truth is not None:
            doc["s_true"] = truth.tolist()
        print(json.dumps(doc))
        return
    print(f"# record {index}")
    if truth is not None:
        print("true indicator rows:")
        for row in truth:
            print("  " + " ".join(str(int(v)) for v in row))
    print("detected indicator rows:")
    for row in result.s_hat:
        print("  " + " ".join(str(int(v)) for v in row))
    print("output LLRs:")
    for row in result.llr:
        print("  " + " ".join(f"{v:+.3f}" for v in row))


def _gen_dataset_command(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    header = export_dataset(config, args.samples, args.out, seed=args.seed)
    print(f"wrote {args.out} ({header.count} records)")
    return 0


def _plot_command(args: argparse.Namespace) -> int:
    import csv

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs, ys = [], []
    with open(args.infile, newline="") as fh:
        for row in csv.DictReader(fh):
            xs.append(float(row["swept_value"]))
            ys.append(float(row[args.y]))
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(xs, ys, marker="o")
    if args.logy:
        ax.set_yscale("log")
    ax.set_xlabel("swept value")
    ax.set_ylabel(args.y)
    ax.grid(True, which="both", alpha=0.4)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsra",
        description="Grant-free random-access simulation and detection experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    eer = sub.add_parser("eer", help="element-error-rate sweep")
    _add_sweep_options(eer, None)

    thr = sub.add_parser("throughput", help="throughput and failure attribution sweep")
    _add_sweep_options(thr, None)

    rob = sub.add_parser("robustness", help="EER versus CSI error level")
    _add_sweep_options(rob, "channel_error_std")

    det = sub.add_parser("detect", help="detect one frame and print the result")
    det.add_argument("--config", help="scenario file (flat YAML)")
    det.add_argument("--seed", type=int, default=None)
    det.add_argument("--weights", default=None)
    det.add_argument("--from-dataset", default=None,
                     help="read inputs from an exported dataset instead")
    det.add_argument("--records", default="all",
                     help="record index, a:b range, or 'all' (with --from-dataset)")
    det.add_argument("--json", action="store_true", help="one JSON object per frame")

    gen = sub.add_parser("gen-dataset", help="export training samples")
    gen.add_argument("--config", required=True)
    gen.add_argument("--samples", type=int, required=True)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", required=True)

    plot = sub.add_parser("plot", help="line chart from a sweep CSV")
    plot.add_argument("--in", dest="infile", required=True)
    plot.add_argument("--y", default="eer", help="CSV column to plot")
    plot.add_argument("--logy", action="store_true")
    plot.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "eer":
            return _run_sweep_command(args, with_throughput=False, robustness=False)
        if args.command == "throughput":
            return _run_sweep_command(args, with_throughput=True, robustness=False)
        if args.command == "robustness":
            return _run_sweep_command(args, with_throughput=False, robustness=True)
        if args.command == "detect":
            if not args.from_dataset and not args.config:
                raise ConfigError("detect needs --config or --from-dataset")
            return _detect_command(args)
        if args.command == "gen-dataset":
            return _gen_dataset_command(args)
        if args.command == "plot":
            return _plot_command(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
