"""Reader for the simulator's exported training datasets.

File layout (independent reimplementation of the documented format): one JSON
header line, then length-prefixed binary records of

  float64[3]                        noise_var_complex, activation_prob, entry_prior
  float32[n_antennas * n_slots]     received matrix, row-major
  float32[n_antennas * n_devices]   receiver-side channel, row-major
  uint8[n_devices * n_slots]        indicator labels, slot-major
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_PREFIX = struct.Struct("<I")
_SCALARS = struct.Struct("<3d")


class DatasetError(ValueError):
    pass


@dataclass
class DatasetArrays:
    """Whole dataset in memory, shaped for batched training."""

    y: np.ndarray             # (count, n_antennas, n_slots) float32
    h: np.ndarray             # (count, n_antennas, n_devices) float32
    labels: np.ndarray        # (count, n_devices, n_slots) uint8
    noise_var_complex: np.ndarray   # (count,) float64
    activation_prob: np.ndarray     # (count,) float64
    entry_prior: np.ndarray         # (count,) float64
    config: dict

    @property
    def count(self) -> int:
        return self.y.shape[0]


def load_arrays(path: str | Path, limit: int | None = None) -> DatasetArrays:
    with open(path, "rb", buffering=1 << 20) as fh:
        header_line = fh.readline()
        try:
            meta = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"bad dataset header: {exc}") from exc
        if meta.get("format") != "fsra-dataset" or meta.get("version") != 1:
            raise DatasetError("unsupported dataset format/version")
        count = meta["count"] if limit is None else min(limit, meta["count"])
        n_ant, n_dev, n_slots = meta["n_antennas"], meta["n_devices"], meta["n_slots"]

        y = np.empty((count, n_ant, n_slots), dtype=np.float32)
        h = np.empty((count, n_ant, n_dev), dtype=np.float32)
        labels = np.empty((count, n_dev, n_slots), dtype=np.uint8)
        noise = np.empty(count)
        act = np.empty(count)
        prior = np.empty(count)
        expected = _SCALARS.size + 4 * n_ant * n_slots + 4 * n_ant * n_dev + n_dev * n_slots

        for i in range(count):
            raw = fh.read(_PREFIX.size)
            if len(raw) < _PREFIX.size:
                raise DatasetError(f"truncated at record {i}")
            (length,) = _PREFIX.unpack(raw)
            payload = fh.read(length)
            if len(payload) != length or length != expected:
                raise DatasetError(f"record {i} is malformed")
            noise[i], act[i], prior[i] = _SCALARS.unpack_from(payload, 0)
            offset = _SCALARS.size
            y[i] = np.frombuffer(payload, "<f4", n_ant * n_slots,
                                 offset).reshape(n_ant, n_slots)
            offset += 4 * n_ant * n_slots
            h[i] = np.frombuffer(payload, "<f4", n_ant * n_dev,
                                 offset).reshape(n_ant, n_dev)
            offset += 4 * n_ant * n_dev
            labels[i] = np.frombuffer(payload, np.uint8, n_dev * n_slots,
                                      offset).reshape(n_dev, n_slots, order="F")
    return DatasetArrays(y=y, h=h, labels=labels, noise_var_complex=noise,
                         activation_prob=act, entry_prior=prior,
                         config=meta.get("config", {}))
