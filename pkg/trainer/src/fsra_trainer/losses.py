"""Cross-entropy objectives on the network's LLR outputs."""

from __future__ import annotations

import torch


def cross_entropy(llr: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Mean per-entry cross entropy between sigmoid(llr) and binary labels.

    Evaluated on the LLRs directly (softplus form, float64): flooring the
    probabilities instead would zero the gradient of every saturated entry,
    and the confidently wrong ones are precisely the training signal here.
    """
    x = llr.double()
    target = labels.double()
    per_entry = (target * torch.nn.functional.softplus(-x)
                 + (1.0 - target) * torch.nn.functional.softplus(x))
    return per_entry.mean()


def detection_loss(final_llr: torch.Tensor, middles: list[torch.Tensor],
                   labels: torch.Tensor, mode: str) -> torch.Tensor:
    """``final``: last layer only; ``multi``: every middle iteration as well."""
    if mode == "final":
        return cross_entropy(final_llr, labels)
    if mode == "multi":
        total = cross_entropy(final_llr, labels)
        for llr in middles:
            total = total + cross_entropy(llr, labels)
        return total
    raise ValueError(f"unknown loss mode {mode!r} (use 'final' or 'multi')")
