#!/usr/bin/env python3
"""Compare the compiled and pure-NumPy detection backends.

Runs the full detection loop over a batch of synthesized frames at a few
representative scales and reports frames per second for every available
backend.

    python3 benchmarks/bench_backends.py [--frames 200]
"""

import argparse
import time

import numpy as np

from fsra.config import SystemConfig
from fsra.harness.sweeps import _fixed_symbol_parts
from fsra.model import frame_streams
from fsra.mpad import available_backends, detect_frames

SCENARIOS = {
    "small  (N_s=20,  N_p=4, M*=7)": SystemConfig(
        n_devices=20, n_slots=4, n_antennas_complex=7,
        activation_prob=0.1, snr_db=16.0, iterations=8),
    "medium (N_s=70,  N_p=4, M*=35)": SystemConfig(
        n_devices=70, n_slots=4, n_antennas_complex=35,
        activation_prob=0.05, snr_db=0.0, iterations=10),
    "large  (N_s=200, N_p=4, M*=50)": SystemConfig(
        n_devices=200, n_slots=4, n_antennas_complex=50,
        activation_prob=0.05, snr_db=0.0, iterations=10),
}


def bench(config: SystemConfig, backend: str, n_frames: int) -> float:
    ys, hs = [], []
    for f in range(n_frames):
        _, y, h_csi = _fixed_symbol_parts(config, frame_streams(0, f, 0))
        ys.append(y)
        hs.append(h_csi)
    ys = np.stack(ys)
    hs = np.stack(hs)
    detect_frames(ys[:4], hs[:4], config, backend=backend)   # warm up
    started = time.perf_counter()
    detect_frames(ys, hs, config, backend=backend)
    elapsed = time.perf_counter() - started
    return n_frames / elapsed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frames", type=int, default=200)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}   frames per scenario: {args.frames}\n")
    header = f"{'scenario':34s}" + "".join(f"{b:>16s}" for b in backends)
    print(header)
    print("-" * len(header))
    for name, config in SCENARIOS.items():
        rates = [bench(config, backend, args.frames) for backend in backends]
        cells = "".join(f"{rate:13.1f}/s" for rate in rates)
        print(f"{name:34s}{cells}")
        if len(rates) == 2:
            print(f"{'':34s}{'speedup':>13s}: {rates[0] / rates[1]:.1f}x")


if __name__ == "__main__":
    main()
