"""NumPy implementation of the Bernoulli-LLR message-passing kernels.

Message arrays use the layout (..., n_ant, n_dev, n_slots) for the edge sets
between received samples and indicator entries, and (..., n_dev, n_slots) for
the edges touching the per-device constraint. Leading dimensions broadcast, so
the same kernels serve a single frame and a batch of frames.

Update equations (one iteration, flooding schedule):

  sample -> entry    l_s = (2*(y - u)*h - h^2) / (2*v)
                     u, v: mean/variance of the other devices' interference,
                     built from their incoming nonzero-probabilities sigmoid(l_vs)
  entry -> constraint  l_vc = sum_ant(l_s) + prior
  constraint -> entry  l_c = -log(exp(-lt) - 1),
                       lt = log(p_act) - sum_{other slots} softplus(l_vc)
  entry -> sample    l_vs = sum_{other ant}(l_s) + prior + l_c

Every kernel clips its output to [-llr_clip, +llr_clip]; the constraint kernel
additionally clamps lt below -log_clip so its log stays finite, and the sample
kernel floors the interference variance at var_floor. With those three guards
all kernels are total on finite inputs.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softplus(x: np.ndarray) -> np.ndarray:
    """log(1 + e^x) without overflow for large |x|."""
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def sn_update(llr_vn_to_sn: np.ndarray, y: np.ndarray, h: np.ndarray,
              noise_var: float, var_floor: float, llr_clip: float) -> np.ndarray:
    """Messages from received samples to indicator entries.

    llr_vn_to_sn: (..., n_ant, n_dev, n_slots); y: (..., n_ant, n_slots);
    h: (..., n_ant, n_dev). Returns (..., n_ant, n_dev, n_slots).
    """
    p = sigmoid(llr_vn_to_sn)
    pq = p * (1.0 - p)
    hc = h[..., :, :, None]
    mean_part = hc * p
    var_part = (hc * hc) * pq
    u = mean_part.sum(axis=-2, keepdims=True) - mean_part
    v = var_part.sum(axis=-2, keepdims=True) - var_part + noise_var
    v = np.maximum(v, var_floor)
    out = ((y[..., :, None, :] - u) * (2.0 * hc) - hc * hc) / (2.0 * v)
    return np.clip(out, -llr_clip, llr_clip)


def vn_to_cn_update(llr_sn_to_vn: np.ndarray, prior_llr: float,
                    llr_clip: float) -> np.ndarray:
    """Messages from indicator entries to their device constraint."""
    out = llr_sn_to_vn.sum(axis=-3) + prior_llr
    return np.clip(out, -llr_clip, llr_clip)


def cn_update(llr_vn_to_cn: np.ndarray, log_act_prob: float,
              log_clip: float, llr_clip: float) -> np.ndarray:
    """Messages from the at-most-one-slot constraint back to the entries."""
    sp = softplus(llr_vn_to_cn)
    total = sp.sum(axis=-1, keepdims=True)
    with np.errstate(over="ignore"):
        lt = np.minimum(log_act_prob - (total - sp), -log_clip)
        out = -np.log(np.expm1(-lt))
    return np.clip(out, -llr_clip, llr_clip)


def vn_to_sn_update(llr_sn_to_vn: np.ndarray, llr_cn_to_vn: np.ndarray,
                    prior_llr: float, llr_clip: float) -> np.ndarray:
    """Messages from indicator entries to received samples (leave-one-out)."""
    total = llr_sn_to_vn.sum(axis=-3, keepdims=True)
    base = (llr_cn_to_vn + prior_llr)[..., None, :, :]
    out = (total - llr_sn_to_vn) + base
    return np.clip(out, -llr_clip, llr_clip)


def output_llr(llr_sn_to_vn: np.ndarray, llr_cn_to_vn: np.ndarray,
               prior_llr: float) -> np.ndarray:
    """Posterior LLR per indicator entry (not clipped)."""
    return llr_sn_to_vn.sum(axis=-3) + prior_llr + llr_cn_to_vn


def run_detect(y: np.ndarray, h: np.ndarray, noise_var: float, log_act_prob: float,
               prior_llr: float, n_iterations: int, llr_clip: float,
               log_clip: float, var_floor: float,
               collect: bool = False) -> np.ndarray | tuple[np.ndarray, np.ndarray]:
    """Full detection loop; returns output LLRs, plus per-iteration LLRs if asked.

    Accepts batched inputs (leading dimensions broadcast through the kernels).
    """
    llr_vs = np.zeros(y.shape[:-2] + (y.shape[-2], h.shape[-1], y.shape[-1]),
                      dtype=np.float64)
    snapshots = [] if collect else None
    llr_s = llr_c = None
    for _ in range(n_iterations):
        llr_s = sn_update(llr_vs, y, h, noise_var, var_floor, llr_clip)
        llr_vc = vn_to_cn_update(llr_s, prior_llr, llr_clip)
        llr_c = cn_update(llr_vc, log_act_prob, log_clip, llr_clip)
        llr_vs = vn_to_sn_update(llr_s, llr_c, prior_llr, llr_clip)
        if collect:
            snapshots.append(output_llr(llr_s, llr_c, prior_llr))
    out = output_llr(llr_s, llr_c, prior_llr)
    if collect:
        return out, np.stack(snapshots, axis=0)
    return out
