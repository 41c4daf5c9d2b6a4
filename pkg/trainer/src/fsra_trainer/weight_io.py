"""Writer/reader for the detector's JSON weight-file format.

Schema: header {version, N_s, N_p, M, L}, a ``layers`` list with one object of
named arrays per iteration (the last one without the entry-to-sample
families), and an ``output`` object. Arrays are nested lists in
(device, slot, antenna[, neighbor]) order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


def save_weight_file(path: str | Path, n_devices: int, n_slots: int,
                     n_antennas: int, n_iterations: int,
                     layers: list[dict[str, np.ndarray]],
                     output: dict[str, np.ndarray]) -> None:
    doc = {
        "version": FORMAT_VERSION,
        "N_s": n_devices,
        "N_p": n_slots,
        "M": n_antennas,
        "L": n_iterations,
        "layers": [{name: np.asarray(arr, dtype=np.float64).tolist()
                    for name, arr in layer.items()} for layer in layers],
        "output": {name: np.asarray(arr, dtype=np.float64).tolist()
                   for name, arr in output.items()},
    }
    Path(path).write_text(json.dumps(doc))


def load_weight_file(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported weight file version {doc.get('version')!r}")
    return doc
