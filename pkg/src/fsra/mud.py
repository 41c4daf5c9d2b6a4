"""Per-slot multi-user detection and packet accounting.

After activity detection, each slot's collided Gaussian payloads are jointly
recovered with the MMSE estimator over the detected-active devices' CSI
columns (complex model). A transmitted packet counts as received only when
its whole slot column was detected exactly and its recovery MSE stays below
the acceptance threshold. Falsely detected devices produce near-zero symbol
estimates that the receiver cannot reject, so they are accounted separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .model import Frame

RIDGE = 1e-12

SUCCESS = "success"
FAIL_ACTIVITY = "fail_activity_detection"
FAIL_DATA = "fail_data_recovery"
FALSE_ALARM = "false_alarm_acceptance"

STATUSES = (SUCCESS, FAIL_ACTIVITY, FAIL_DATA, FALSE_ALARM)


@dataclass(frozen=True)
class PacketOutcome:
    device: int
    slot: int
    status: str


@dataclass
class SlotRecovery:
    slot: int
    devices: np.ndarray        # detected-active device indices
    symbols: np.ndarray        # (len(devices), payload) recovered estimates
    mse: dict[int, float]      # device -> payload-mean squared error vs truth


def mmse_recover(y_slot: np.ndarray, h_sub: np.ndarray, noise_var: float,
                 power: float = 1.0) -> np.ndarray:
    """MMSE estimate of the detected devices' symbols in one slot.

    y_slot: (n_ant, payload) complex; h_sub: (n_ant, n_detected) complex.
    An empty device set yields an empty estimate.
    """
    if h_sub.shape[1] == 0:
        return np.zeros((0, y_slot.shape[1]), dtype=np.complex128)
    n_ant = h_sub.shape[0]
    gram = power * (h_sub @ h_sub.conj().T) + noise_var * np.eye(n_ant)
    try:
        filtered = np.linalg.solve(gram, y_slot)
    except np.linalg.LinAlgError:
        filtered = np.linalg.solve(gram + RIDGE * np.eye(n_ant), y_slot)
    return power * (h_sub.conj().T @ filtered)


def recover_frame(frame: Frame, s_hat: np.ndarray,
                  config: SystemConfig) -> list[SlotRecovery]:
    """Run the per-slot MMSE recovery using the receiver-side CSI."""
    csi = frame.csi
    recoveries = []
    for slot in range(config.n_slots):
        devices = np.flatnonzero(s_hat[:, slot])
        symbols = mmse_recover(frame.rx_data[slot], csi[:, devices],
                               config.noise_var_complex)
        mse = {}
        for row, device in enumerate(devices):
            if frame.indicators[device, slot]:
                err = symbols[row] - frame.tx_data[device]
                mse[int(device)] = float(np.mean(np.abs(err) ** 2))
        recoveries.append(SlotRecovery(slot=slot, devices=devices,
                                       symbols=symbols, mse=mse))
    return recoveries


def classify_packets(s_true: np.ndarray, s_hat: np.ndarray,
                     mse_by_device: dict[int, float],
                     mse_threshold: float) -> list[PacketOutcome]:
    """Assign one status per transmitted or falsely detected packet.

    A slot with any detection error fails all its true packets (activity error
    takes precedence over data recovery); false alarms are always accepted by
    the receiver and reported as their own status.
    """
    outcomes = []
    n_dev, n_slots = s_true.shape
    for slot in range(n_slots):
        column_ok = bool(np.array_equal(s_true[:, slot], s_hat[:, slot]))
        for device in np.flatnonzero(s_true[:, slot]):
            device = int(device)
            if not column_ok:
                status = FAIL_ACTIVITY
            elif mse_by_device.get(device, np.inf) < mse_threshold:
                status = SUCCESS
            else:
                status = FAIL_DATA
            outcomes.append(PacketOutcome(device=device, slot=slot, status=status))
        for device in np.flatnonzero((s_hat[:, slot] == 1) & (s_true[:, slot] == 0)):
            outcomes.append(PacketOutcome(device=int(device), slot=slot,
                                          status=FALSE_ALARM))
    return outcomes


def frame_outcomes(frame: Frame, s_hat: np.ndarray,
                   config: SystemConfig) -> list[PacketOutcome]:
    """Recovery plus classification for one frame."""
    mse_all: dict[int, float] = {}
    for recovery in recover_frame(frame, s_hat, config):
        mse_all.update(recovery.mse)
    return classify_packets(frame.indicators, s_hat, mse_all, config.mse_threshold)


def throughput(per_frame_outcomes: list[list[PacketOutcome]]) -> dict[str, float]:
    """Mean successes per frame plus the failure attribution counts."""
    if not per_frame_outcomes:
        raise ValueError("throughput needs at least one frame")
    counts = {status: 0 for status in STATUSES}
    for outcomes in per_frame_outcomes:
        for outcome in outcomes:
            counts[outcome.status] += 1
    n_frames = len(per_frame_outcomes)
    return {
        "throughput": counts[SUCCESS] / n_frames,
        "successes": counts[SUCCESS],
        "fail_activity": counts[FAIL_ACTIVITY],
        "fail_data": counts[FAIL_DATA],
        "false_alarms": counts[FALSE_ALARM],
        "frames": n_frames,
    }
