"""Experiment driver: sweeps, dataset export, CLI."""

from .dataset import (DatasetFormatError, DatasetHeader, DatasetRecord,
                      export_dataset, iter_dataset, load_dataset)
from .sweeps import (DETECTORS, RunReport, SweepSpec, run_eer_sweep,
                     run_robustness_sweep, run_sweep, run_throughput_sweep)

__all__ = [
    "DETECTORS", "DatasetFormatError", "DatasetHeader", "DatasetRecord",
    "RunReport", "SweepSpec", "export_dataset", "iter_dataset", "load_dataset",
    "run_eer_sweep", "run_robustness_sweep", "run_sweep", "run_throughput_sweep",
]
