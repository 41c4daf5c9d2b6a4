"""Forward pass of the detector with trained per-edge weights.

Structurally identical to the plain kernels, but every incoming message (and
every bias term: received sample, noise variance, prior log-odds, log
activation probability) carries its own multiplicative weight per edge per
iteration. With an all-ones weight set this reduces algebraically to the
plain update equations.

Leave-one-out weight families are stored without the self index; they are
scattered into dense (.., full-axis) tensors with a zero diagonal so the
contractions can run as einsums. Inputs may carry leading batch dimensions.
"""

from __future__ import annotations

import numpy as np

from ._kernels_np import sigmoid, softplus
from .weights import WeightSet


def _skip_diag_cols(n: int) -> np.ndarray:
    """(n, n-1) map from neighbor position to actual index, skipping self."""
    j = np.arange(n - 1)
    return j[None, :] + (j[None, :] >= np.arange(n)[:, None])


def _dense_device_weights(w: np.ndarray) -> np.ndarray:
    """(S, P, M, S-1) -> (S, P, M, S) with zeros on the self-device slice."""
    n_dev = w.shape[0]
    cols = _skip_diag_cols(n_dev)[:, None, None, :]
    dense = np.zeros(w.shape[:3] + (n_dev,), dtype=np.float64)
    np.put_along_axis(dense, np.broadcast_to(cols, w.shape), w, axis=-1)
    return dense


def _dense_slot_weights(w: np.ndarray) -> np.ndarray:
    """(S, P, P-1) -> (S, P, P) with zeros on the self-slot slice."""
    n_slots = w.shape[1]
    cols = _skip_diag_cols(n_slots)[None, :, :]
    dense = np.zeros(w.shape[:2] + (n_slots,), dtype=np.float64)
    np.put_along_axis(dense, np.broadcast_to(cols, w.shape), w, axis=-1)
    return dense


def _dense_antenna_weights(w: np.ndarray) -> np.ndarray:
    """(S, P, M, M-1) -> (S, P, M, M) with zeros on the self-antenna slice."""
    n_ant = w.shape[2]
    cols = _skip_diag_cols(n_ant)[None, None, :, :]
    dense = np.zeros(w.shape[:3] + (n_ant,), dtype=np.float64)
    np.put_along_axis(dense, np.broadcast_to(cols, w.shape), w, axis=-1)
    return dense


def weighted_forward(y: np.ndarray, h: np.ndarray, noise_var: float,
                     log_act_prob: float, prior_llr: float, weights: WeightSet,
                     llr_clip: float, log_clip: float, var_floor: float,
                     collect: bool = False):
    """Run the weighted detector; returns output LLRs (plus snapshots if asked).

    y: (..., n_ant, n_slots); h: (..., n_ant, n_dev). Snapshots are the
    plain posterior combination of each iteration's messages, matching the
    quantities used by the multi-term training loss.
    """
    n_iter = weights.n_iterations
    hc = h[..., :, :, None]
    h2 = hc * hc
    llr_es = np.zeros(y.shape[:-2] + (y.shape[-2], h.shape[-1], y.shape[-1]),
                      dtype=np.float64)
    snapshots = [] if collect else None
    llr_se = llr_ce = None
    for index in range(n_iter):
        lw = weights.layers[index]

        # samples -> entries, with weighted interference statistics
        p = sigmoid(llr_es)
        pq = p * (1.0 - p)
        u = np.einsum("spmt,...mtp->...msp", _dense_device_weights(lw["w_u"]), hc * p)
        v = np.einsum("spmt,...mtp->...msp", _dense_device_weights(lw["w_v"]), h2 * pq)
        v = v + np.moveaxis(lw["w_sigma2"], -1, 0) * noise_var
        v = np.maximum(v, var_floor)
        wy = np.moveaxis(lw["w_y"], -1, 0) * y[..., :, None, :]
        llr_se = np.clip(((wy - u) * (2.0 * hc) - h2) / (2.0 * v), -llr_clip, llr_clip)

        # entries -> constraints
        llr_ec = np.einsum("spm,...msp->...sp", lw["w_A2B"], llr_se)
        llr_ec = np.clip(llr_ec + lw["wb_B"] * prior_llr, -llr_clip, llr_clip)

        # constraints -> entries
        sp = softplus(llr_ec)
        lt = lw["w_pa"] * log_act_prob - np.einsum(
            "spt,...st->...sp", _dense_slot_weights(lw["w_B2C"]), sp)
        with np.errstate(over="ignore"):
            lt = np.minimum(lt, -log_clip)
            llr_ce = np.clip(-np.log(np.expm1(-lt)), -llr_clip, llr_clip)

        # entries -> samples (skipped after the last iteration)
        if index < n_iter - 1:
            llr_es = np.einsum("spmt,...tsp->...msp",
                               _dense_antenna_weights(lw["w_A2D"]), llr_se)
            llr_es = llr_es + np.moveaxis(lw["w_C2D"], -1, 0) * llr_ce[..., None, :, :]
            llr_es = np.clip(llr_es + lw["wb_D"] * prior_llr, -llr_clip, llr_clip)

        if collect:
            snapshots.append(llr_se.sum(axis=-3) + prior_llr + llr_ce)

    out = np.einsum("spm,...msp->...sp", weights.output["w_A2dec"], llr_se)
    out = out + weights.output["w_C2dec"] * llr_ce + weights.output["wb_dec"] * prior_llr
    if collect:
        return out, np.stack(snapshots, axis=0)
    return out
