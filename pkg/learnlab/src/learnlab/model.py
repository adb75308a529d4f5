"""Dual-tower value network: axial-attention matrix encoder + action-sequence
transformer, fused through a linear layer into a scalar value head.

Sized for desk-scale experiments (n <= 8, d <= 128, a few layers per tower);
nothing here aims at the scale the architecture was designed for.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .embed import make_embedding


@dataclass(frozen=True)
class DualTowerConfig:
    n: int
    dim: int = 32
    axial_layers: int = 1
    seq_layers: int = 2
    heads: int = 4
    embedding: str = "compositional"  # or "naive-one-hot"
    max_history: int = 64

    def __post_init__(self):
        if self.dim % self.heads:
            raise ValueError("dim must be divisible by heads")


class AxialBlock(nn.Module):
    """Self-attention along one grid axis, then a feed-forward, pre-norm."""

    def __init__(self, dim: int, heads: int, axis: int):
        super().__init__()
        self.axis = axis  # 1 = rows as sequences, 2 = columns as sequences
        self.norm1 = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.norm2 = nn.LayerNorm(dim)
        self.ff = nn.Sequential(nn.Linear(dim, 2 * dim), nn.GELU(), nn.Linear(2 * dim, dim))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        b, r, c, d = x.shape
        if self.axis == 1:
            seq = x.permute(0, 2, 1, 3).reshape(b * c, r, d)
        else:
            seq = x.reshape(b * r, c, d)
        h = self.norm1(seq)
        h, _ = self.attn(h, h, h, need_weights=False)
        seq = seq + h
        seq = seq + self.ff(self.norm2(seq))
        if self.axis == 1:
            return seq.reshape(b, c, r, d).permute(0, 2, 1, 3)
        return seq.reshape(b, r, c, d)


class UnitaryTower(nn.Module):
    """Entry-wise projection + 2D positional encodings + axial attention."""

    def __init__(self, n: int, dim: int, layers: int, heads: int):
        super().__init__()
        side = 2 * n
        self.proj = nn.Linear(1, dim)
        self.row_pos = nn.Parameter(torch.randn(side, 1, dim) * 0.02)
        self.col_pos = nn.Parameter(torch.randn(1, side, dim) * 0.02)
        blocks = []
        for _ in range(layers):
            blocks.append(AxialBlock(dim, heads, axis=1))
            blocks.append(AxialBlock(dim, heads, axis=2))
        self.blocks = nn.ModuleList(blocks)
        self.norm = nn.LayerNorm(dim)

    def forward(self, states: torch.Tensor) -> torch.Tensor:
        x = self.proj(states.float().unsqueeze(-1)) + self.row_pos + self.col_pos
        for block in self.blocks:
            x = block(x)
        return self.norm(x).mean(dim=(1, 2))


class SequenceTower(nn.Module):
    """Cached action embeddings + transformer stack + masked mean pooling.

    A learned null token is always prepended, so empty histories are valid.
    """

    def __init__(self, n: int, dim: int, layers: int, heads: int, embedding: str,
                 max_history: int):
        super().__init__()
        self.embed = make_embedding(embedding, n, dim)
        self.null_token = nn.Parameter(torch.randn(1, 1, dim) * 0.02)
        self.pos = nn.Parameter(torch.randn(max_history + 1, dim) * 0.02)
        layer = nn.TransformerEncoderLayer(
            d_model=dim, nhead=heads, dim_feedforward=2 * dim,
            batch_first=True, norm_first=True,
        )
        self.encoder = nn.TransformerEncoder(
            layer, num_layers=layers, enable_nested_tensor=False
        )
        self.max_history = max_history

    def forward(self, history: torch.Tensor, history_len: torch.Tensor) -> torch.Tensor:
        b, t = history.shape
        if t > self.max_history:
            history = history[:, -self.max_history :]
            t = self.max_history
        safe = history.clamp(min=0)
        tokens = self.embed(safe)
        tokens = torch.cat([self.null_token.expand(b, 1, -1), tokens], dim=1)
        tokens = tokens + self.pos[: t + 1]
        pad = torch.cat(
            [torch.zeros(b, 1, dtype=torch.bool, device=history.device),
             history < 0],
            dim=1,
        )
        out = self.encoder(tokens, src_key_padding_mask=pad)
        keep = (~pad).unsqueeze(-1).float()
        return (out * keep).sum(dim=1) / keep.sum(dim=1)


class DualTowerValueNet(nn.Module):
    def __init__(self, cfg: DualTowerConfig):
        super().__init__()
        self.cfg = cfg
        self.unitary = UnitaryTower(cfg.n, cfg.dim, cfg.axial_layers, cfg.heads)
        self.sequence = SequenceTower(
            cfg.n, cfg.dim, cfg.seq_layers, cfg.heads, cfg.embedding, cfg.max_history
        )
        self.fuse = nn.Linear(2 * cfg.dim, cfg.dim)
        self.value_head = nn.Linear(cfg.dim, 1)
        self.alpha = nn.Parameter(torch.zeros(()))
        self.beta = nn.Parameter(torch.zeros(()))

    def forward(self, states, history, history_len) -> torch.Tensor:
        h_unitary = self.unitary(states)
        h_seq = self.sequence(history, history_len)
        fused = torch.nn.functional.gelu(
            self.fuse(torch.cat([h_unitary, h_seq], dim=-1))
        )
        return self.value_head(fused).squeeze(-1)
