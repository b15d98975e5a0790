"""Sequence-of-point-clouds regression model.

Each frame passes through a shared pointwise MLP and a max pool (so the
per-frame feature is permutation invariant), the T frame features run
through a transformer encoder to mix temporal context, and the mean-pooled
embedding feeds an MLP that regresses every output slot at once.

Slots: up to ``max_slots`` joints. During training, slot k is bound to the
k-th ground-truth node after sorting nodes by position (lexicographic), a
spatially stable assignment; the order head then predicts each slot's
position in the manipulation sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .errors import ShapeMismatch


@dataclass(frozen=True)
class ModelConfig:
    points_per_frame: int = 128
    frames: int = 12
    width: int = 128
    attention_layers: int = 2
    attention_heads: int = 4
    max_slots: int = 3

    @property
    def per_slot_dim(self) -> int:
        # direction 3 + position 3 + per-frame states T + type logits 2
        return 3 + 3 + self.frames + 2

    @property
    def output_dim(self) -> int:
        s = self.max_slots
        return s * self.per_slot_dim + s + s * s  # + dof logits + order logits


class ChainRegressor(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        w = config.width
        self.point_mlp = nn.Sequential(
            nn.Linear(3, w), nn.ReLU(),
            nn.Linear(w, w), nn.ReLU(),
            nn.Linear(w, w),
        )
        layer = nn.TransformerEncoderLayer(
            d_model=w, nhead=config.attention_heads, dim_feedforward=2 * w,
            batch_first=True, dropout=0.0,
        )
        self.temporal = nn.TransformerEncoder(layer, num_layers=config.attention_layers)
        self.head = nn.Sequential(
            nn.Linear(w, w), nn.ReLU(),
            nn.Linear(w, config.output_dim),
        )

    def _check(self, frames: torch.Tensor) -> torch.Tensor:
        if frames.dim() == 3:
            frames = frames.unsqueeze(0)
        if frames.dim() != 4 or frames.shape[-1] != 3:
            raise ShapeMismatch(f"expected (B, T, P, 3), got {tuple(frames.shape)}")
        if frames.shape[1] != self.config.frames:
            raise ShapeMismatch(
                f"model expects {self.config.frames} frames, got {frames.shape[1]}"
            )
        return frames

    def frame_features(self, frames: torch.Tensor) -> torch.Tensor:
        """Per-frame permutation-invariant tokens, shape (B, T, width)."""
        frames = self._check(frames)
        return self.point_mlp(frames).amax(dim=2)

    def encode_sequence(self, frames: torch.Tensor) -> torch.Tensor:
        """Temporally attended, mean-pooled sequence embedding (B, width)."""
        return self.temporal(self.frame_features(frames)).mean(dim=1)

    def forward(self, frames: torch.Tensor) -> dict:
        cfg = self.config
        out = self.head(self.encode_sequence(frames))
        b = out.shape[0]
        s = cfg.max_slots
        per_slot = out[:, : s * cfg.per_slot_dim].reshape(b, s, cfg.per_slot_dim)
        rest = out[:, s * cfg.per_slot_dim:]
        return {
            "directions": per_slot[:, :, 0:3],
            "positions": per_slot[:, :, 3:6],
            "states": per_slot[:, :, 6:6 + cfg.frames],
            "type_logits": per_slot[:, :, 6 + cfg.frames:],
            "dof_logits": rest[:, :s],
            "order_logits": rest[:, s:].reshape(b, s, s),
        }


def decode_order(order_logits: torch.Tensor, n: int):
    """Greedy rank assignment: rank r takes the unassigned slot scoring
    highest for r. Returns slot indices in manipulation order."""
    logits = order_logits.detach().cpu().numpy()
    free = list(range(n))
    sequence = []
    for rank in range(n):
        best = max(free, key=lambda slot: logits[slot, rank])
        free.remove(best)
        sequence.append(best)
    return sequence
