"""Per-edge weight sets for the trained (unfolded) detector.

A weight set holds one array per weight family per iteration, with dimensions
fixed by the factor-graph connectivity. The leave-one-out families carry a
trailing neighbor axis one smaller than the full axis (a device never weights
itself, a slot never weights itself, an antenna never weights itself). The
final iteration has no entry-to-sample family: the output layer reads the last
sample-to-entry messages directly, so that family exists for iterations
1..L-1 only.

The on-disk form is a JSON document: a metadata header
{version, N_s, N_p, M, L}, a ``layers`` list with one object per iteration,
and an ``output`` object. Array values are stored as nested lists in
(device, slot, antenna[, neighbor]) index order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1

# family name -> axis template; "S-1", "P-1", "M-1" mark leave-one-out axes
LAYER_FAMILIES = {
    "w_y": ("S", "P", "M"),
    "w_u": ("S", "P", "M", "S-1"),
    "w_v": ("S", "P", "M", "S-1"),
    "w_sigma2": ("S", "P", "M"),
    "w_A2B": ("S", "P", "M"),
    "wb_B": ("S", "P"),
    "w_pa": ("S", "P"),
    "w_B2C": ("S", "P", "P-1"),
}
# entry-to-sample families, absent for the final iteration
D_FAMILIES = {
    "w_A2D": ("S", "P", "M", "M-1"),
    "w_C2D": ("S", "P", "M"),
    "wb_D": ("S", "P"),
}
OUTPUT_FAMILIES = {
    "w_A2dec": ("S", "P", "M"),
    "w_C2dec": ("S", "P"),
    "wb_dec": ("S", "P"),
}


class WeightFormatError(ValueError):
    """Raised when a weight file is malformed or inconsistent."""


def _resolve_shape(template, n_devices: int, n_slots: int, n_antennas: int):
    sizes = {"S": n_devices, "P": n_slots, "M": n_antennas,
             "S-1": n_devices - 1, "P-1": n_slots - 1, "M-1": n_antennas - 1}
    return tuple(sizes[t] for t in template)


@dataclass
class WeightSet:
    n_devices: int
    n_slots: int
    n_antennas: int            # real-stacked antenna count (2 * complex antennas)
    n_iterations: int
    layers: list[dict[str, np.ndarray]]   # len n_iterations; last lacks D families
    output: dict[str, np.ndarray]
    _is_unit: bool | None = field(default=None, repr=False, compare=False)

    def validate(self) -> None:
        if min(self.n_devices, self.n_slots, self.n_antennas, self.n_iterations) < 1:
            raise WeightFormatError("all weight-set dimensions must be positive")
        if len(self.layers) != self.n_iterations:
            raise WeightFormatError(
                f"expected {self.n_iterations} layer entries, found {len(self.layers)}")
        for index, layer in enumerate(self.layers):
            families = dict(LAYER_FAMILIES)
            if index < self.n_iterations - 1:
                families.update(D_FAMILIES)
            self._check_families(layer, families, f"layers[{index}]")
        self._check_families(self.output, OUTPUT_FAMILIES, "output")

    def _check_families(self, group: dict[str, np.ndarray], families, where: str) -> None:
        for name, template in families.items():
            if name not in group:
                raise WeightFormatError(f"missing section {where}.{name}")
            arr = group[name]
            shape = _resolve_shape(template, self.n_devices, self.n_slots, self.n_antennas)
            if arr.shape != shape:
                raise WeightFormatError(
                    f"section {where}.{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise WeightFormatError(f"section {where}.{name} contains non-finite values")
        extra = sorted(set(group) - set(families))
        if extra:
            raise WeightFormatError(f"unexpected sections in {where}: {', '.join(extra)}")

    @property
    def is_unit(self) -> bool:
        """True when every weight equals 1 (reduces to the plain detector)."""
        if self._is_unit is None:
            groups = list(self.layers) + [self.output]
            self._is_unit = all(np.all(arr == 1.0) for g in groups for arr in g.values())
        return self._is_unit

    def matches(self, n_devices: int, n_slots: int, n_antennas: int,
                n_iterations: int) -> bool:
        return (self.n_devices, self.n_slots, self.n_antennas, self.n_iterations) == (
            n_devices, n_slots, n_antennas, n_iterations)


def make_unit_weights(n_devices: int, n_slots: int, n_antennas: int,
                      n_iterations: int) -> WeightSet:
    """All-ones weight set (the untrained starting point)."""
    layers = []
    for index in range(n_iterations):
        families = dict(LAYER_FAMILIES)
        if index < n_iterations - 1:
            families.update(D_FAMILIES)
        layers.append({
            name: np.ones(_resolve_shape(t, n_devices, n_slots, n_antennas))
            for name, t in families.items()})
    output = {name: np.ones(_resolve_shape(t, n_devices, n_slots, n_antennas))
              for name, t in OUTPUT_FAMILIES.items()}
    ws = WeightSet(n_devices, n_slots, n_antennas, n_iterations, layers, output)
    ws.validate()
    return ws


def save_weights(weights: WeightSet, path: str | Path) -> None:
    weights.validate()
    doc = {
        "version": FORMAT_VERSION,
        "N_s": weights.n_devices,
        "N_p": weights.n_slots,
        "M": weights.n_antennas,
        "L": weights.n_iterations,
        "layers": [{name: arr.tolist() for name, arr in layer.items()}
                   for layer in weights.layers],
        "output": {name: arr.tolist() for name, arr in weights.output.items()},
    }
    Path(path).write_text(json.dumps(doc))


def _as_array(obj, where: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise WeightFormatError(f"section {where} is not a numeric array: {exc}") from exc
    return arr


def load_weights(path: str | Path) -> WeightSet:
    """Parse and validate a weight file; errors name the offending section."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise WeightFormatError(f"weight file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise WeightFormatError(f"weight file {path} must contain a JSON object")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise WeightFormatError(
            f"unsupported weight file version {version!r} (expected {FORMAT_VERSION})")
    for key in ("N_s", "N_p", "M", "L"):
        if not isinstance(doc.get(key), int):
            raise WeightFormatError(f"missing or non-integer header field {key!r}")
    if "layers" not in doc:
        raise WeightFormatError("missing section layers")
    if "output" not in doc:
        raise WeightFormatError("missing section output")
    layers = []
    for index, raw in enumerate(doc["layers"]):
        if not isinstance(raw, dict):
            raise WeightFormatError(f"section layers[{index}] must be an object")
        layers.append({name: _as_array(value, f"layers[{index}].{name}")
                       for name, value in raw.items()})
    if not isinstance(doc["output"], dict):
        raise WeightFormatError("section output must be an object")
    output = {name: _as_array(value, f"output.{name}")
              for name, value in doc["output"].items()}
    ws = WeightSet(doc["N_s"], doc["N_p"], doc["M"], doc["L"], layers, output)
    ws.validate()
    return ws
