"""Activity detection driver: iteration schedule, state, and hard decision."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..config import SystemConfig, prior_llr as prior_log_odds
from . import _kernels_np
from ._backend import get_backend
from .weighted import weighted_forward
from .weights import WeightSet

# Value guards making every kernel total; all overridable per run.
DEFAULT_LLR_CLIP = 50.0
DEFAULT_CN_LOG_CLIP = 1e-10
DEFAULT_VAR_FLOOR = 1e-12


@dataclass(frozen=True)
class DetectorParams:
    iterations: int
    llr_clip: float = DEFAULT_LLR_CLIP
    cn_log_clip: float = DEFAULT_CN_LOG_CLIP
    min_variance: float = DEFAULT_VAR_FLOOR

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if min(self.llr_clip, self.cn_log_clip, self.min_variance) <= 0.0:
            raise ValueError("llr_clip, cn_log_clip and min_variance must be > 0")


@dataclass
class MessageState:
    """All per-edge LLR arrays of one detection run (kept for diagnostics)."""

    llr_sn_to_vn: np.ndarray   # (n_ant, n_dev, n_slots)
    llr_vn_to_cn: np.ndarray   # (n_dev, n_slots)
    llr_cn_to_vn: np.ndarray   # (n_dev, n_slots)
    llr_vn_to_sn: np.ndarray   # (n_ant, n_dev, n_slots)
    prior_llr: float


@dataclass
class DetectionResult:
    s_hat: np.ndarray                        # (n_dev, n_slots) int8
    llr: np.ndarray                          # (n_dev, n_slots)
    iteration_llrs: np.ndarray | None = None  # (iterations, n_dev, n_slots)
    state: MessageState | None = field(default=None, repr=False)


def harden(llr: np.ndarray) -> np.ndarray:
    """Elementwise decision: active iff the posterior LLR is non-negative."""
    return (llr >= 0.0).astype(np.int8)


def _log_act_prob(activation_prob: float) -> float:
    # Finite stand-in for log(0): far below the clip horizon, so the
    # constraint messages still saturate to -llr_clip.
    return math.log(activation_prob) if activation_prob > 0.0 else -745.0


def _validate_inputs(y: np.ndarray, h: np.ndarray, config: SystemConfig) -> None:
    n_ant = config.n_antennas_real
    if y.shape[-2:] != (n_ant, config.n_slots):
        raise ValueError(f"received matrix has shape {y.shape}, expected "
                         f"(..., {n_ant}, {config.n_slots})")
    if h.shape[-2:] != (n_ant, config.n_devices):
        raise ValueError(f"channel matrix has shape {h.shape}, expected "
                         f"(..., {n_ant}, {config.n_devices})")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(h))):
        raise ValueError("received and channel matrices must be finite")


def detect(y: np.ndarray, h_csi: np.ndarray, config: SystemConfig,
           params: DetectorParams | None = None, weights: WeightSet | None = None,
           collect_iterations: bool = False, keep_state: bool = False,
           backend: str | None = None) -> DetectionResult:
    """Detect one frame's indicator matrix from the real-stacked inputs.

    ``weights`` switches to the trained forward pass; an all-ones weight set
    is routed through the plain kernels (the weighted updates reduce to them
    exactly, and the plain path is much faster at scale).
    """
    if params is None:
        params = DetectorParams(iterations=config.iterations)
    y = np.ascontiguousarray(y, dtype=np.float64)
    h_csi = np.ascontiguousarray(h_csi, dtype=np.float64)
    _validate_inputs(y, h_csi, config)
    if y.ndim != 2 or h_csi.ndim != 2:
        raise ValueError("detect handles a single frame; see detect_frames")

    noise_var = config.noise_var_real
    log_pa = _log_act_prob(config.activation_prob)
    prior = float(np.clip(prior_log_odds(config.entry_prior),
                          -params.llr_clip, params.llr_clip))

    if weights is not None:
        if not weights.matches(config.n_devices, config.n_slots,
                               config.n_antennas_real, params.iterations):
            raise ValueError(
                f"weight set is for (N_s={weights.n_devices}, N_p={weights.n_slots}, "
                f"M={weights.n_antennas}, L={weights.n_iterations}); run needs "
                f"(N_s={config.n_devices}, N_p={config.n_slots}, "
                f"M={config.n_antennas_real}, L={params.iterations})")
        if not weights.is_unit:
            out = weighted_forward(y, h_csi, noise_var, log_pa, prior, weights,
                                   params.llr_clip, params.cn_log_clip,
                                   params.min_variance, collect=collect_iterations)
            llr, snaps = out if collect_iterations else (out, None)
            return DetectionResult(s_hat=harden(llr), llr=llr, iteration_llrs=snaps)

    if keep_state or collect_iterations:
        return _detect_python_stateful(y, h_csi, config, params, noise_var,
                                       log_pa, prior, collect_iterations, keep_state)

    kern = get_backend(backend)
    llr = kern.run_detect(y, h_csi, noise_var, log_pa, prior, params.iterations,
                          params.llr_clip, params.cn_log_clip, params.min_variance)
    return DetectionResult(s_hat=harden(llr), llr=llr)


def _detect_python_stateful(y, h_csi, config, params, noise_var, log_pa, prior,
                            collect: bool, keep_state: bool) -> DetectionResult:
    k = _kernels_np
    n_ant = config.n_antennas_real
    state = MessageState(
        llr_sn_to_vn=np.zeros((n_ant, config.n_devices, config.n_slots)),
        llr_vn_to_cn=np.zeros((config.n_devices, config.n_slots)),
        llr_cn_to_vn=np.zeros((config.n_devices, config.n_slots)),
        llr_vn_to_sn=np.zeros((n_ant, config.n_devices, config.n_slots)),
        prior_llr=prior)
    snapshots = []
    for _ in range(params.iterations):
        state.llr_sn_to_vn = k.sn_update(state.llr_vn_to_sn, y, h_csi, noise_var,
                                         params.min_variance, params.llr_clip)
        state.llr_vn_to_cn = k.vn_to_cn_update(state.llr_sn_to_vn, prior, params.llr_clip)
        state.llr_cn_to_vn = k.cn_update(state.llr_vn_to_cn, log_pa,
                                         params.cn_log_clip, params.llr_clip)
        state.llr_vn_to_sn = k.vn_to_sn_update(state.llr_sn_to_vn, state.llr_cn_to_vn,
                                               prior, params.llr_clip)
        if collect:
            snapshots.append(k.output_llr(state.llr_sn_to_vn, state.llr_cn_to_vn, prior))
    llr = k.output_llr(state.llr_sn_to_vn, state.llr_cn_to_vn, prior)
    return DetectionResult(s_hat=harden(llr), llr=llr,
                           iteration_llrs=np.stack(snapshots) if collect else None,
                           state=state if keep_state else None)


def detect_frames(ys: np.ndarray, hs: np.ndarray, config: SystemConfig,
                  params: DetectorParams | None = None,
                  weights: WeightSet | None = None, backend: str | None = None,
                  batch: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Detect a stack of frames; returns (s_hat, llr) with a leading frame axis.

    Compiled backend runs frame by frame; the NumPy backend vectorizes over
    frame chunks of size ``batch`` (the kernels broadcast leading dims).
    """
    if params is None:
        params = DetectorParams(iterations=config.iterations)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    hs = np.ascontiguousarray(hs, dtype=np.float64)
    _validate_inputs(ys, hs, config)
    n_frames = ys.shape[0]
    if hs.shape[0] != n_frames:
        raise ValueError("ys and hs must carry the same number of frames")

    if weights is not None and not weights.is_unit:
        noise_var = config.noise_var_real
        log_pa = _log_act_prob(config.activation_prob)
        prior = float(np.clip(prior_log_odds(config.entry_prior),
                              -params.llr_clip, params.llr_clip))
        if not weights.matches(config.n_devices, config.n_slots,
                               config.n_antennas_real, params.iterations):
            raise ValueError("weight set dimensions do not match the run")
        llr = np.empty((n_frames, config.n_devices, config.n_slots))
        for start in range(0, n_frames, batch):
            stop = min(start + batch, n_frames)
            llr[start:stop] = weighted_forward(
                ys[start:stop], hs[start:stop], noise_var, log_pa, prior, weights,
                params.llr_clip, params.cn_log_clip, params.min_variance)
        return harden(llr), llr

    kern = get_backend(backend)
    noise_var = config.noise_var_real
    log_pa = _log_act_prob(config.activation_prob)
    prior = float(np.clip(prior_log_odds(config.entry_prior),
                          -params.llr_clip, params.llr_clip))
    llr = np.empty((n_frames, config.n_devices, config.n_slots))
    if kern.BACKEND_NAME == "compiled":
        for i in range(n_frames):
            llr[i] = kern.run_detect(ys[i], hs[i], noise_var, log_pa, prior,
                                     params.iterations, params.llr_clip,
                                     params.cn_log_clip, params.min_variance)
    else:
        for start in range(0, n_frames, batch):
            stop = min(start + batch, n_frames)
            llr[start:stop] = kern.run_detect(
                ys[start:stop], hs[start:stop], noise_var, log_pa, prior,
                params.iterations, params.llr_clip, params.cn_log_clip,
                params.min_variance)
    return harden(llr), llr
