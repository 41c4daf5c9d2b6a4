"""The detector iteration unfolded into a layered network with per-edge weights.

Layer pattern per iteration: interference cancellation from received samples
(A), aggregation toward the per-device constraint (B), the constraint update
(C) and the extrinsic feedback to the samples (D); the final iteration skips D
and feeds a weighted output layer, giving 4L-1 hidden layers overall. All-ones
parameters reproduce the plain message-passing detector.

Clamps use clipped forward values with straight-through gradients, so training
never sees the singularity of the constraint update or the hard clip edges.
"""

from __future__ import annotations

import math

import torch
from torch import nn

LLR_CLIP = 50.0
CN_LOG_CLIP = 1e-10
VAR_FLOOR = 1e-12

LAYER_FAMILIES = ("w_y", "w_u", "w_v", "w_sigma2", "w_A2B", "wb_B", "w_pa", "w_B2C")
D_FAMILIES = ("w_A2D", "w_C2D", "wb_D")
OUTPUT_FAMILIES = ("w_A2dec", "w_C2dec", "wb_dec")


class _ClampSTE(torch.autograd.Function):
    """Clamp on the forward pass, identity gradient on the backward pass."""

    @staticmethod
    def forward(ctx, x, lo, hi):
        return x.clamp(min=lo, max=hi)

    @staticmethod
    def backward(ctx, grad):
        return grad, None, None


def ste_clamp(x: torch.Tensor, lo: float | None, hi: float | None) -> torch.Tensor:
    return _ClampSTE.apply(x, lo, hi)


def _skip_diag_index(n: int) -> torch.Tensor:
    j = torch.arange(n - 1)
    return j.unsqueeze(0) + (j.unsqueeze(0) >= torch.arange(n).unsqueeze(1)).long()


class UnfoldedDetector(nn.Module):
    def __init__(self, n_devices: int, n_slots: int, n_antennas: int,
                 n_iterations: int, init_value: float = 1.0,
                 dtype: torch.dtype = torch.float32):
        super().__init__()
        if min(n_devices, n_slots, n_antennas, n_iterations) < 1:
            raise ValueError("all network dimensions must be positive")
        self.n_devices = n_devices
        self.n_slots = n_slots
        self.n_antennas = n_antennas
        self.n_iterations = n_iterations

        s, p, m = n_devices, n_slots, n_antennas
        shapes = {"w_y": (s, p, m), "w_u": (s, p, m, s - 1), "w_v": (s, p, m, s - 1),
                  "w_sigma2": (s, p, m), "w_A2B": (s, p, m), "wb_B": (s, p),
                  "w_pa": (s, p), "w_B2C": (s, p, p - 1), "w_A2D": (s, p, m, m - 1),
                  "w_C2D": (s, p, m), "wb_D": (s, p), "w_A2dec": (s, p, m),
                  "w_C2dec": (s, p), "wb_dec": (s, p)}

        def param(name):
            return nn.Parameter(torch.full(shapes[name], float(init_value),
                                           dtype=dtype))

        self.layers = nn.ModuleList()
        for index in range(n_iterations):
            names = LAYER_FAMILIES + (D_FAMILIES if index < n_iterations - 1 else ())
            self.layers.append(nn.ParameterDict({n: param(n) for n in names}))
        self.output = nn.ParameterDict({n: param(n) for n in OUTPUT_FAMILIES})

        self.register_buffer("_dev_idx", _skip_diag_index(s), persistent=False)
        self.register_buffer("_slot_idx", _skip_diag_index(p), persistent=False)
        self.register_buffer("_ant_idx", _skip_diag_index(m), persistent=False)

    # -- dense leave-one-out weight tensors (zero on the self index) ---------
    def _dense_dev(self, w: torch.Tensor) -> torch.Tensor:
        s, p, m = self.n_devices, self.n_slots, self.n_antennas
        idx = self._dev_idx.view(s, 1, 1, s - 1).expand(s, p, m, s - 1)
        return torch.zeros(s, p, m, s, dtype=w.dtype,
                           device=w.device).scatter(-1, idx, w)

    def _dense_slot(self, w: torch.Tensor) -> torch.Tensor:
        s, p = self.n_devices, self.n_slots
        idx = self._slot_idx.view(1, p, p - 1).expand(s, p, p - 1)
        return torch.zeros(s, p, p, dtype=w.dtype,
                           device=w.device).scatter(-1, idx, w)

    def _dense_ant(self, w: torch.Tensor) -> torch.Tensor:
        s, p, m = self.n_devices, self.n_slots, self.n_antennas
        idx = self._ant_idx.view(1, 1, m, m - 1).expand(s, p, m, m - 1)
        return torch.zeros(s, p, m, m, dtype=w.dtype,
                           device=w.device).scatter(-1, idx, w)

    def forward(self, y: torch.Tensor, h: torch.Tensor, noise_var: torch.Tensor,
                log_act_prob: torch.Tensor, prior_llr: torch.Tensor,
                collect_middle: bool = False):
        """Batched forward pass.

        y: (B, M, n_slots); h: (B, M, n_devices); the three scalars broadcast
        per sample as (B,) tensors. Returns the output LLRs (B, n_devices,
        n_slots) and, when asked, the per-iteration posterior combinations
        used by the multi-term loss.
        """
        batch = y.shape[0]
        nv = noise_var.view(batch, 1, 1, 1)
        log_pa = log_act_prob.view(batch, 1, 1)
        prior2 = prior_llr.view(batch, 1, 1)
        prior3 = prior_llr.view(batch, 1, 1, 1)
        hc = h.unsqueeze(-1)                   # (B, M, S, 1)
        h2 = hc * hc
        llr_es = torch.zeros(batch, self.n_antennas, self.n_devices, self.n_slots,
                             dtype=y.dtype, device=y.device)
        middles = []
        llr_se = llr_ce = None
        for index, lw in enumerate(self.layers):
            # layer A: weighted interference statistics per sample-entry edge
            prob = torch.sigmoid(llr_es)
            pq = prob * (1.0 - prob)
            u = torch.einsum("spmt,bmtp->bmsp", self._dense_dev(lw["w_u"]), hc * prob)
            v = torch.einsum("spmt,bmtp->bmsp", self._dense_dev(lw["w_v"]), h2 * pq)
            v = v + lw["w_sigma2"].permute(2, 0, 1) * nv
            v = ste_clamp(v, VAR_FLOOR, None)
            wy = lw["w_y"].permute(2, 0, 1) * y.unsqueeze(-2)
            llr_se = ste_clamp(((wy - u) * (2.0 * hc) - h2) / (2.0 * v),
                               -LLR_CLIP, LLR_CLIP)

            # layer B: entries toward their device constraint
            llr_ec = torch.einsum("spm,bmsp->bsp", lw["w_A2B"], llr_se)
            llr_ec = ste_clamp(llr_ec + lw["wb_B"] * prior2, -LLR_CLIP, LLR_CLIP)

            # layer C: the at-most-one-slot constraint
            sp = torch.nn.functional.softplus(llr_ec)
            lt = lw["w_pa"] * log_pa - torch.einsum(
                "spt,bst->bsp", self._dense_slot(lw["w_B2C"]), sp)
            lt = ste_clamp(lt, None, -CN_LOG_CLIP)
            # -log(exp(-lt) - 1) rewritten so neither the forward nor the
            # backward pass can overflow in float32
            llr_ce = ste_clamp(lt - torch.log1p(-torch.exp(lt)),
                               -LLR_CLIP, LLR_CLIP)

            # layer D: extrinsic feedback to the samples (absent after last)
            if index < self.n_iterations - 1:
                llr_es = torch.einsum("spmt,btsp->bmsp",
                                      self._dense_ant(lw["w_A2D"]), llr_se)
                llr_es = llr_es + lw["w_C2D"].permute(2, 0, 1) * llr_ce.unsqueeze(1)
                llr_es = ste_clamp(llr_es + lw["wb_D"] * prior3,
                                   -LLR_CLIP, LLR_CLIP)

            if collect_middle and index < self.n_iterations - 1:
                middles.append(llr_se.sum(dim=1) + prior2 + llr_ce)

        out = torch.einsum("spm,bmsp->bsp", self.output["w_A2dec"], llr_se)
        out = out + self.output["w_C2dec"] * llr_ce + self.output["wb_dec"] * prior2
        if collect_middle:
            return out, middles
        return out

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def export_families(self) -> tuple[list[dict], dict]:
        """Weights as plain float64 arrays in the transport-file layout."""
        layers = [{name: param.detach().cpu().double().numpy()
                   for name, param in layer.items()} for layer in self.layers]
        output = {name: param.detach().cpu().double().numpy()
                  for name, param in self.output.items()}
        return layers, output


def prior_log_odds(entry_prior: torch.Tensor, clip: float = LLR_CLIP) -> torch.Tensor:
    """Clipped log-odds of the entry prior (matches the detector's guard)."""
    eps = torch.finfo(torch.float64).tiny
    odds = entry_prior.clamp_min(eps) / (1.0 - entry_prior).clamp_min(eps)
    return torch.log(odds).clamp(-clip, clip)


def log_activation(act_prob: torch.Tensor) -> torch.Tensor:
    """log(p_act) with the same finite stand-in for zero as the detector."""
    return torch.where(act_prob > 0, torch.log(act_prob.clamp_min(1e-323)),
                       torch.full_like(act_prob, -745.0))
