"""Monte-Carlo experiment engine: one detector, one swept parameter.

Frames stream through in chunks (never materialized for a whole point) and
every frame derives from SeedSequence(seed, (point, frame)), so any point of
any sweep is reproducible in isolation and results do not depend on chunking.
Calibration frames live in a disjoint stream namespace.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..baselines import (calibrate_threshold, lmmse_soft, mf_soft,
                         row_constrained_decision)
from ..config import SystemConfig, sweep_value
from ..model import (Frame, FrameStreams, frame_streams, make_indicator,
                     draw_channel, stack_real, synthesize_fixed_symbol_rx,
                     synthesize_frame)
from ..mpad import DetectorParams, WeightSet, detect_frames, load_weights
from ..mpad._backend import get_backend
from ..mpad._kernels_np import sigmoid
from ..mud import SUCCESS, frame_outcomes, throughput as summarize_throughput

DETECTORS = ("mpad", "mpad_weighted", "lmmse", "mf")
_CALIBRATION_SPACE = 1_000_000   # point-index offset for calibration streams


@dataclass
class SweepSpec:
    config: SystemConfig
    param: str
    values: list
    frames: int
    detector: str = "mpad"
    weights_path: str | None = None
    threshold: float = 0.5
    calibration_frames: int = 0      # >0 calibrates the baseline threshold per point
    with_throughput: bool = False
    row_constraint: bool = False
    seed: int | None = None          # overrides config.rng_seed

    def __post_init__(self) -> None:
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.detector not in DETECTORS:
            raise ValueError(f"unknown detector {self.detector!r}; pick from {DETECTORS}")
        if self.detector == "mpad_weighted" and not self.weights_path:
            raise ValueError("detector 'mpad_weighted' needs a weight file")


@dataclass
class RunReport:
    points: list[dict]
    manifest: dict

    # CSV column order; per-point wall clock stays in the manifest so repeated
    # runs with one seed emit byte-identical CSV.
    CSV_COLUMNS = ("swept_value", "eer", "throughput", "fail_activity",
                   "fail_data", "false_alarms", "frames", "eer_se", "throughput_se")

    def csv_text(self) -> str:
        lines = [",".join(self.CSV_COLUMNS)]
        for point in self.points:
            lines.append(",".join(repr(point[c]) if isinstance(point[c], float)
                                  else str(point[c]) for c in self.CSV_COLUMNS))
        return "\n".join(lines) + "\n"


def _fixed_symbol_parts(config: SystemConfig, streams: FrameStreams):
    """Indicator matrix plus real-stacked receiver inputs (no payload)."""
    indicators = make_indicator(config, streams.activity)
    channel, error = draw_channel(config, streams.channel, streams.channel_error)
    rx = synthesize_fixed_symbol_rx(indicators, channel, config.noise_var_complex,
                                    streams.noise)
    y, h_csi = stack_real(rx, channel + error)
    return indicators, y, h_csi


def _detect_chunk(ys, hs, config, spec: SweepSpec, params, weights, threshold):
    if spec.detector in ("mpad", "mpad_weighted"):
        s_hat, llr = detect_frames(ys, hs, config, params, weights)
        if spec.row_constraint:
            s_hat = np.stack([row_constrained_decision(sigmoid(l), 0.5) for l in llr])
        return s_hat
    out = np.empty((ys.shape[0], config.n_devices, config.n_slots), dtype=np.int8)
    for i in range(ys.shape[0]):
        if spec.detector == "lmmse":
            scores = lmmse_soft(ys[i], hs[i], config.noise_var_real, config.entry_prior)
        else:
            scores = mf_soft(ys[i], hs[i])
        out[i] = row_constrained_decision(scores, threshold)
    return out


def _calibrate_point(config: SystemConfig, spec: SweepSpec, seed: int,
                     point_index: int) -> float:
    scores_rows, true_rows = [], []
    for f in range(spec.calibration_frames):
        streams = frame_streams(seed, f, _CALIBRATION_SPACE + point_index)
        indicators, y, h_csi = _fixed_symbol_parts(config, streams)
        if spec.detector == "lmmse":
            scores = lmmse_soft(y, h_csi, config.noise_var_real, config.entry_prior)
        else:
            scores = mf_soft(y, h_csi)
        scores_rows.append(scores)
        true_rows.append(indicators)
    return calibrate_threshold(np.concatenate(scores_rows), np.concatenate(true_rows))


def run_point(config: SystemConfig, spec: SweepSpec, point_index: int,
              weights: WeightSet | None, threshold: float,
              chunk_size: int = 256) -> dict:
    """All metrics for one sweep point."""
    seed = spec.seed if spec.seed is not None else config.rng_seed
    params = DetectorParams(iterations=config.iterations)
    n_elements = config.n_devices * config.n_slots
    frame_errors = np.zeros(spec.frames, dtype=np.int64)
    frame_successes = np.zeros(spec.frames, dtype=np.int64)
    all_outcomes = []
    if spec.with_throughput:
        chunk_size = min(chunk_size, 64)

    for start in range(0, spec.frames, chunk_size):
        stop = min(start + chunk_size, spec.frames)
        indicator_list, frames_list, ys, hs = [], [], [], []
        for f in range(start, stop):
            streams = frame_streams(seed, f, point_index)
            if spec.with_throughput:
                frame = synthesize_frame(config, streams)
                frames_list.append(frame)
                indicator_list.append(frame.indicators)
                ys.append(frame.stacked.y)
                hs.append(frame.stacked.h_csi)
            else:
                indicators, y, h_csi = _fixed_symbol_parts(config, streams)
                indicator_list.append(indicators)
                ys.append(y)
                hs.append(h_csi)
        s_hats = _detect_chunk(np.stack(ys), np.stack(hs), config, spec, params,
                               weights, threshold)
        for offset, f in enumerate(range(start, stop)):
            frame_errors[f] = int(np.sum(s_hats[offset] != indicator_list[offset]))
            if spec.with_throughput:
                outcomes = frame_outcomes(frames_list[offset], s_hats[offset], config)
                all_outcomes.append(outcomes)
                frame_successes[f] = sum(1 for o in outcomes if o.status == SUCCESS)

    eer = float(frame_errors.sum()) / (n_elements * spec.frames)
    eer_se = (float(np.std(frame_errors, ddof=1)) / np.sqrt(spec.frames) / n_elements
              if spec.frames > 1 else 0.0)
    point = {"eer": eer, "eer_se": eer_se, "frames": spec.frames,
             "threshold": threshold}
    if spec.with_throughput:
        summary = summarize_throughput(all_outcomes)
        point.update({k: summary[k] for k in
                      ("throughput", "fail_activity", "fail_data", "false_alarms")})
        point["throughput_se"] = (float(np.std(frame_successes, ddof=1))
                                  / np.sqrt(spec.frames) if spec.frames > 1 else 0.0)
    else:
        point.update({"throughput": 0.0, "fail_activity": 0, "fail_data": 0,
                      "false_alarms": 0, "throughput_se": 0.0})
    return point


def run_sweep(spec: SweepSpec) -> RunReport:
    """Evaluate every sweep value; fresh deterministic frames per point."""
    seed = spec.seed if spec.seed is not None else spec.config.rng_seed
    weights = load_weights(spec.weights_path) if spec.weights_path else None
    points = []
    seconds = []
    thresholds = []
    for point_index, value in enumerate(spec.values):
        config = sweep_value(spec.config, spec.param, value).replace(rng_seed=seed)
        threshold = spec.threshold
        if spec.detector in ("lmmse", "mf") and spec.calibration_frames > 0:
            threshold = _calibrate_point(config, spec, seed, point_index)
        started = time.perf_counter()
        point = run_point(config, spec, point_index, weights, threshold)
        seconds.append(time.perf_counter() - started)
        thresholds.append(threshold)
        point["swept_value"] = value
        points.append(point)

    manifest = {
        "version": __version__,
        "backend": get_backend().BACKEND_NAME,
        "config": _config_echo(spec.config, seed),
        "param": spec.param,
        "values": list(spec.values),
        "frames": spec.frames,
        "detector": spec.detector,
        "weights": spec.weights_path,
        "seed": seed,
        "thresholds": thresholds,
        "calibration_frames": spec.calibration_frames,
        "row_constraint": spec.row_constraint,
        "seconds": seconds,
    }
    return RunReport(points=points, manifest=manifest)


def run_eer_sweep(spec: SweepSpec) -> RunReport:
    spec.with_throughput = False
    return run_sweep(spec)


def run_throughput_sweep(spec: SweepSpec) -> RunReport:
    spec.with_throughput = True
    return run_sweep(spec)


def run_robustness_sweep(spec: SweepSpec) -> RunReport:
    """EER versus CSI error level (receiver sees channel plus error)."""
    if spec.param != "channel_error_std":
        raise ValueError("robustness sweeps vary 'channel_error_std'")
    spec.with_throughput = False
    return run_sweep(spec)


def _config_echo(config: SystemConfig, seed: int) -> dict:
    import dataclasses
    echo = dataclasses.asdict(config)
    echo["rng_seed"] = seed
    return echo
