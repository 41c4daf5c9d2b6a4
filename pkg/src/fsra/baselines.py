"""Reference linear detectors for the EER comparison curves.

Both estimators produce soft scores for the indicator matrix from the
real-stacked model; the hard decision then enforces the at-most-one-slot-per-
device constraint: take each row's best slot and accept it only above a
threshold.
"""

from __future__ import annotations

import numpy as np

RIDGE = 1e-12   # diagonal loading when the noise-free system matrix is singular


def lmmse_soft(y: np.ndarray, h: np.ndarray, noise_var: float,
               entry_prior: float) -> np.ndarray:
    """Linear MMSE scores with the Bernoulli entry prior.

    Entries are modeled with mean ``entry_prior`` and variance
    ``entry_prior * (1 - entry_prior)``; the estimate is the prior mean plus
    the LMMSE correction of the centered observation.
    """
    n_ant = h.shape[0]
    prior_var = entry_prior * (1.0 - entry_prior)
    gram = prior_var * (h @ h.T) + noise_var * np.eye(n_ant)
    centered = y - entry_prior * h.sum(axis=1, keepdims=True)
    try:
        filtered = np.linalg.solve(gram, centered)
    except np.linalg.LinAlgError:
        filtered = np.linalg.solve(gram + RIDGE * np.eye(n_ant), centered)
    return entry_prior + prior_var * (h.T @ filtered)


def mf_soft(y: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Matched-filter scores: per-device projection of each slot's sample."""
    norms = np.einsum("ms,ms->s", h, h)
    if np.any(norms == 0.0):
        raise ValueError("channel matrix has a zero-norm column")
    return (h.T @ y) / norms[:, None]


def row_constrained_decision(scores: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Hard decision with at most one active slot per row.

    Per row, the highest-scoring slot (lowest index on ties) is declared
    active iff its score reaches ``threshold``.
    """
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    n_dev, _ = scores.shape
    best = np.argmax(scores, axis=1)
    rows = np.arange(n_dev)
    s_hat = np.zeros_like(scores, dtype=np.int8)
    accept = scores[rows, best] >= threshold
    s_hat[rows[accept], best[accept]] = 1
    return s_hat


def threshold_error_curve(scores_rows: np.ndarray, true_rows: np.ndarray,
                          grid: np.ndarray) -> np.ndarray:
    """Total element errors of the row-constrained decision per grid threshold.

    ``scores_rows``/``true_rows``: (n_rows, n_slots) stacked over frames.
    Exploits that only each row's best slot depends on the threshold: a row
    contributes its accepted-cost when max >= theta, else its rejected-cost.
    """
    best = np.argmax(scores_rows, axis=1)
    rows = np.arange(scores_rows.shape[0])
    best_scores = scores_rows[rows, best]
    true_active = true_rows.sum(axis=1) > 0
    hit = true_rows[rows, best] == 1
    # errors if the best slot is accepted / if the row is left empty
    cost_accept = np.where(hit, 0, np.where(true_active, 2, 1))
    cost_reject = np.where(true_active, 1, 0)

    order = np.argsort(best_scores, kind="stable")
    sorted_scores = best_scores[order]
    delta = (cost_accept - cost_reject)[order].astype(np.int64)
    # rows with sorted_scores >= theta are accepted; suffix sums give the total
    suffix = np.concatenate([np.cumsum(delta[::-1])[::-1], [0]])
    base = int(cost_reject.sum())
    first_accepted = np.searchsorted(sorted_scores, grid, side="left")
    return base + suffix[first_accepted]


def calibrate_threshold(scores_rows: np.ndarray, true_rows: np.ndarray,
                        grid: np.ndarray | None = None) -> float:
    """Threshold minimizing element errors on validation rows (first on ties)."""
    if grid is None:
        grid = np.linspace(0.0, 1.0, 201)
    errors = threshold_error_curve(scores_rows, true_rows, np.asarray(grid))
    return float(grid[int(np.argmin(errors))])
