"""Training-sample export: length-prefixed binary records behind a JSON header.

Layout: one JSON header line terminated by ``\\n``, then ``count`` records.
Each record is a little-endian uint32 byte length followed by:

  float64[3]  noise_var_complex, activation_prob, entry_prior
  float32[M * n_slots]    real-stacked received fixed-symbol matrix, row-major
  float32[M * n_devices]  real-stacked receiver-side channel, row-major
  uint8[n_devices * n_slots]  indicator labels, slot-major (slot 0 devices
                              first, then slot 1, ...), the flattening used by
                              the training loss

Records stream to disk one at a time, so multi-million-sample exports never
materialize in memory. Identical (config, seed) re-exports are byte-identical.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from ..config import SystemConfig
from ..model import frame_streams
from .sweeps import _fixed_symbol_parts

FORMAT_NAME = "fsra-dataset"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<I")


class DatasetFormatError(ValueError):
    """Raised for malformed dataset files."""


@dataclass(frozen=True)
class DatasetHeader:
    count: int
    n_devices: int
    n_slots: int
    n_antennas: int      # real-stacked rows (2 * complex antennas)
    seed: int
    config: dict

    @property
    def record_bytes(self) -> int:
        m, s, p = self.n_antennas, self.n_devices, self.n_slots
        return 3 * 8 + 4 * m * p + 4 * m * s + s * p


@dataclass(frozen=True)
class DatasetRecord:
    y: np.ndarray           # (n_antennas, n_slots) float64 (from float32 storage)
    h_csi: np.ndarray       # (n_antennas, n_devices)
    labels: np.ndarray      # (n_devices, n_slots) uint8
    noise_var_complex: float
    activation_prob: float
    entry_prior: float


def export_dataset(config: SystemConfig, n_samples: int, path: str | Path,
                   seed: int | None = None) -> DatasetHeader:
    """Write ``n_samples`` independent frames in the record format above."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    seed = config.rng_seed if seed is None else seed
    import dataclasses
    header = DatasetHeader(count=n_samples, n_devices=config.n_devices,
                           n_slots=config.n_slots, n_antennas=config.n_antennas_real,
                           seed=seed, config=dataclasses.asdict(config))
    meta = {"format": FORMAT_NAME, "version": FORMAT_VERSION,
            "count": header.count, "n_devices": header.n_devices,
            "n_slots": header.n_slots, "n_antennas": header.n_antennas,
            "label_order": "slot-major", "seed": seed, "config": header.config}
    scalars = struct.Struct("<3d")
    with open(path, "wb", buffering=1 << 20) as fh:
        fh.write(json.dumps(meta).encode() + b"\n")
        for index in range(n_samples):
            streams = frame_streams(seed, index, 0)
            indicators, y, h_csi = _fixed_symbol_parts(config, streams)
            payload = b"".join((
                scalars.pack(config.noise_var_complex, config.activation_prob,
                             config.entry_prior),
                y.astype("<f4").tobytes(),
                h_csi.astype("<f4").tobytes(),
                indicators.ravel(order="F").astype(np.uint8).tobytes(),
            ))
            fh.write(_PREFIX.pack(len(payload)))
            fh.write(payload)
    return header


def read_header(fh: io.BufferedReader) -> DatasetHeader:
    line = fh.readline()
    if not line:
        raise DatasetFormatError("empty dataset file")
    try:
        meta = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"bad dataset header: {exc}") from exc
    if meta.get("format") != FORMAT_NAME:
        raise DatasetFormatError(f"not a {FORMAT_NAME} file")
    if meta.get("version") != FORMAT_VERSION:
        raise DatasetFormatError(f"unsupported dataset version {meta.get('version')!r}")
    return DatasetHeader(count=meta["count"], n_devices=meta["n_devices"],
                         n_slots=meta["n_slots"], n_antennas=meta["n_antennas"],
                         seed=meta["seed"], config=meta["config"])


def _parse_record(header: DatasetHeader, payload: bytes, index: int) -> DatasetRecord:
    if len(payload) != header.record_bytes:
        raise DatasetFormatError(
            f"record {index} has {len(payload)} bytes, expected {header.record_bytes}")
    m, s, p = header.n_antennas, header.n_devices, header.n_slots
    noise_var, act_prob, prior = struct.unpack_from("<3d", payload, 0)
    offset = 24
    y = np.frombuffer(payload, dtype="<f4", count=m * p, offset=offset)
    offset += 4 * m * p
    h = np.frombuffer(payload, dtype="<f4", count=m * s, offset=offset)
    offset += 4 * m * s
    labels = np.frombuffer(payload, dtype=np.uint8, count=s * p, offset=offset)
    return DatasetRecord(
        y=y.astype(np.float64).reshape(m, p),
        h_csi=h.astype(np.float64).reshape(m, s),
        labels=labels.reshape(s, p, order="F").copy(),
        noise_var_complex=noise_var, activation_prob=act_prob, entry_prior=prior)


def iter_dataset(path: str | Path) -> tuple[DatasetHeader, Iterator[DatasetRecord]]:
    """Open a dataset; returns the header and a lazy record iterator."""
    fh = open(path, "rb", buffering=1 << 20)
    header = read_header(fh)

    def records() -> Iterator[DatasetRecord]:
        try:
            for index in range(header.count):
                prefix = fh.read(_PREFIX.size)
                if len(prefix) < _PREFIX.size:
                    raise DatasetFormatError(f"truncated at record {index}")
                (length,) = _PREFIX.unpack(prefix)
                payload = fh.read(length)
                if len(payload) < length:
                    raise DatasetFormatError(f"truncated inside record {index}")
                yield _parse_record(header, payload, index)
        finally:
            fh.close()

    return header, records()


def load_dataset(path: str | Path) -> tuple[DatasetHeader, list[DatasetRecord]]:
    header, records = iter_dataset(path)
    return header, list(records)
