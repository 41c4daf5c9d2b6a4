"""Adam training of the unfolded detector over an exported dataset."""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .data import DatasetArrays, load_arrays
from .losses import detection_loss
from .network import UnfoldedDetector, log_activation, prior_log_odds
from .weight_io import save_weight_file


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    dataset: str
    out: str
    epochs: int = 20
    batch_size: int = 2000
    learning_rate: float = 1e-3
    initial_weight: float = 1.0
    loss: str = "multi"               # 'final' or 'multi'
    val_fraction: float = 0.1
    seed: int = 0
    grad_clip: float = 10.0           # max gradient norm; <=0 disables
    max_samples: int | None = None    # truncate the dataset (smoke runs)
    log_path: str | None = None       # JSONL training log; defaults to <out>.log

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in [0, 1)")
        if self.loss not in ("final", "multi"):
            raise ValueError("loss must be 'final' or 'multi'")


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float
    val_eer: float


class _Batches:
    """Dataset tensors plus the per-sample bias scalars."""

    def __init__(self, data: DatasetArrays, dtype: torch.dtype):
        self.y = torch.from_numpy(data.y).to(dtype)
        self.h = torch.from_numpy(data.h).to(dtype)
        self.labels = torch.from_numpy(data.labels).to(dtype)
        # the detector works on the real-stacked model: half the complex
        # noise variance per component
        self.noise_var = torch.from_numpy(data.noise_var_complex / 2.0).to(dtype)
        self.log_pa = log_activation(
            torch.from_numpy(data.activation_prob)).to(dtype)
        self.prior = prior_log_odds(torch.from_numpy(data.entry_prior)).to(dtype)

    def slice(self, idx: torch.Tensor):
        return (self.y[idx], self.h[idx], self.noise_var[idx],
                self.log_pa[idx], self.prior[idx], self.labels[idx])


def evaluate(net: UnfoldedDetector, batches: _Batches, indices: torch.Tensor,
             loss_mode: str, batch_size: int) -> tuple[float, float]:
    """Mean loss and EER over ``indices``."""
    total_loss = 0.0
    errors = 0
    n_elements = 0
    with torch.no_grad():
        for start in range(0, len(indices), batch_size):
            idx = indices[start:start + batch_size]
            y, h, nv, lpa, prior, labels = batches.slice(idx)
            final, middles = net(y, h, nv, lpa, prior, collect_middle=True)
            loss = detection_loss(final, middles, labels, loss_mode)
            total_loss += float(loss) * len(idx)
            decisions = (final >= 0.0).to(labels.dtype)
            errors += int((decisions != labels).sum())
            n_elements += labels.numel()
    return total_loss / len(indices), errors / n_elements


def train(config: TrainConfig, dtype: torch.dtype = torch.float32,
          log_stream=None) -> list[EpochStats]:
    """Run the optimization and write the best-validation weight file."""
    torch.manual_seed(config.seed)
    data = load_arrays(config.dataset, limit=config.max_samples)
    if data.count < 2 and config.epochs > 0:
        raise ValueError("training needs at least two samples")
    net = UnfoldedDetector(
        n_devices=data.labels.shape[1], n_slots=data.labels.shape[2],
        n_antennas=data.y.shape[1], n_iterations=int(data.config["iterations"]),
        init_value=config.initial_weight, dtype=dtype)
    batches = _Batches(data, dtype)

    rng = np.random.default_rng(config.seed)
    order = torch.from_numpy(rng.permutation(data.count))
    n_val = int(round(config.val_fraction * data.count))
    val_idx = order[:n_val]
    train_idx = order[n_val:]
    if len(train_idx) == 0:
        train_idx = order

    log_file = None
    if config.log_path != "":
        log_file = open(config.log_path or f"{config.out}.log", "w")

    def emit(record: dict) -> None:
        line = json.dumps(record)
        if log_file is not None:
            log_file.write(line + "\n")
            log_file.flush()
        print(line, file=log_stream or sys.stderr, flush=True)

    optimizer = torch.optim.Adam(net.parameters(), lr=config.learning_rate)
    history: list[EpochStats] = []
    best = (math.inf, math.inf)    # (val EER, val loss)
    best_state = {k: v.detach().clone() for k, v in net.state_dict().items()}

    try:
        for epoch in range(1, config.epochs + 1):
            perm = torch.from_numpy(rng.permutation(len(train_idx)))
            shuffled = train_idx[perm]
            running = 0.0
            seen = 0
            for start in range(0, len(shuffled), config.batch_size):
                idx = shuffled[start:start + config.batch_size]
                y, h, nv, lpa, prior, labels = batches.slice(idx)
                optimizer.zero_grad()
                final, middles = net(y, h, nv, lpa, prior, collect_middle=True)
                loss = detection_loss(final, middles, labels, config.loss)
                if not torch.isfinite(loss):
                    raise TrainingDiverged(
                        f"non-finite loss at epoch {epoch}, batch {start}")
                loss.backward()
                if config.grad_clip > 0:
                    torch.nn.utils.clip_grad_norm_(net.parameters(), config.grad_clip)
                optimizer.step()
                running += loss.detach().item() * len(idx)
                seen += len(idx)
            eval_idx = val_idx if len(val_idx) else train_idx
            val_loss, val_eer = evaluate(net, batches, eval_idx, config.loss,
                                         config.batch_size)
            stats = EpochStats(epoch=epoch, train_loss=running / seen,
                               val_loss=val_loss, val_eer=val_eer)
            history.append(stats)
            emit({"epoch": epoch, "train_loss": stats.train_loss,
                  "val_loss": val_loss, "val_eer": val_eer})
            if (val_eer, val_loss) < best:
                best = (val_eer, val_loss)
                best_state = {k: v.detach().clone()
                              for k, v in net.state_dict().items()}
        net.load_state_dict(best_state)
        layers, output = net.export_families()
        save_weight_file(config.out, net.n_devices, net.n_slots, net.n_antennas,
                         net.n_iterations, layers, output)
        emit({"exported": config.out,
              "best_val_eer": None if math.isinf(best[0]) else best[0]})
    finally:
        if log_file is not None:
            log_file.close()
    return history
