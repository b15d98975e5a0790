"""The six-term compound training loss.

All per-slot terms average over active slots only (slot k is active when
the sample has more than k joints). Positions are compared line-aware: the
component of the offset along the ground-truth axis direction is free,
because sliding a point along its own axis changes nothing physical.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

_EPS = 1e-12


def _masked_mean(values: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    mask = mask.to(values.dtype)
    return (values * mask).sum() / mask.sum().clamp_min(1.0)


def direction_loss(pred_dir, gt_dir, mask):
    """1 - |cos| per active slot; sign-invariant, zero iff axes align."""
    cos = F.cosine_similarity(pred_dir, gt_dir, dim=-1, eps=_EPS)
    return _masked_mean(1.0 - cos.abs(), mask)


def position_loss(pred_pos, gt_pos, gt_dir, mask):
    """Squared distance from the predicted point to the ground-truth axis line."""
    d = gt_dir / gt_dir.norm(dim=-1, keepdim=True).clamp_min(_EPS)
    offset = pred_pos - gt_pos
    along = (offset * d).sum(dim=-1, keepdim=True) * d
    return _masked_mean((offset - along).pow(2).sum(dim=-1), mask)


def order_loss(order_logits, gt_ranks, mask):
    """Cross entropy of each active slot's position-in-sequence logits."""
    b, s, _ = order_logits.shape
    ce = F.cross_entropy(
        order_logits.reshape(b * s, s), gt_ranks.reshape(b * s).clamp(0, s - 1),
        reduction="none",
    ).reshape(b, s)
    return _masked_mean(ce, mask)


def dof_loss(dof_logits, gt_dof_index):
    """Cross entropy over the joint-count classes (index = count - 1)."""
    return F.cross_entropy(dof_logits, gt_dof_index)


def state_loss(pred_states, gt_states, mask):
    """Mean squared per-frame state error over active slots."""
    per_slot = (pred_states - gt_states).pow(2).mean(dim=-1)
    return _masked_mean(per_slot, mask)


def norm_loss(pred_dir, mask):
    """(||d|| - 1)^2 per active slot; keeps direction outputs near unit length."""
    return _masked_mean((pred_dir.norm(dim=-1) - 1.0).pow(2), mask)


def compound_loss(prediction: dict, target: dict):
    """Unit-weight sum of the six terms; returns (total, per-term dict)."""
    mask = target["mask"]
    terms = {
        "dir": direction_loss(prediction["directions"], target["directions"], mask),
        "pos": position_loss(prediction["positions"], target["positions"],
                             target["directions"], mask),
        "ord": order_loss(prediction["order_logits"], target["ranks"], mask),
        "dof": dof_loss(prediction["dof_logits"], target["dof_index"]),
        "q": state_loss(prediction["states"], target["states"], mask),
        "norm": norm_loss(prediction["directions"], mask),
    }
    return sum(terms.values()), terms
