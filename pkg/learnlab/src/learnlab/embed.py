"""Action embeddings: compositional factorization vs a naive one-hot table."""

from __future__ import annotations

import torch
from torch import nn

from .actions import K_MAX, KINDS, alphabet


class CompositionalEmbedding(nn.Module):
    """Sum of learned type, angle, weight and global-index tables.

    The type table indexes the Pauli string identity (kind, site); the angle
    table the 40 discrete (sign, k) values; the weight table the string
    weight in {1, 2}; the global table the raw alphabet index.  Actions that
    share components share gradients, which is the whole point.
    """

    def __init__(self, n: int, dim: int):
        super().__init__()
        acts = alphabet(n)
        type_ids, angle_ids, weight_ids = [], [], []
        type_key = {}
        for a in acts:
            key = (a.kind, a.site)
            if key not in type_key:
                type_key[key] = len(type_key)
            type_ids.append(type_key[key])
            sign_slot = 0 if a.sign > 0 else 1
            angle_ids.append(sign_slot * K_MAX + (a.k - 1))
            weight_ids.append(a.pauli_weight - 1)
        self.register_buffer("type_ids", torch.tensor(type_ids))
        self.register_buffer("angle_ids", torch.tensor(angle_ids))
        self.register_buffer("weight_ids", torch.tensor(weight_ids))
        self.type_emb = nn.Embedding(len(type_key), dim)
        self.angle_emb = nn.Embedding(2 * K_MAX, dim)
        self.weight_emb = nn.Embedding(2, dim)
        self.global_emb = nn.Embedding(len(acts), dim)
        assert len(type_key) == 5 * n - 4

    def forward(self, action_ids: torch.Tensor) -> torch.Tensor:
        return (
            self.type_emb(self.type_ids[action_ids])
            + self.angle_emb(self.angle_ids[action_ids])
            + self.weight_emb(self.weight_ids[action_ids])
            + self.global_emb(action_ids)
        )


class NaiveEmbedding(nn.Module):
    """Plain one-hot lookup: every action learns an independent vector."""

    def __init__(self, n: int, dim: int):
        super().__init__()
        self.table = nn.Embedding(len(alphabet(n)), dim)

    def forward(self, action_ids: torch.Tensor) -> torch.Tensor:
        return self.table(action_ids)


def make_embedding(mode: str, n: int, dim: int) -> nn.Module:
    if mode == "compositional":
        return CompositionalEmbedding(n, dim)
    if mode == "naive-one-hot":
        return NaiveEmbedding(n, dim)
    raise ValueError(f"unknown embedding mode {mode!r}")
