"""Distill a trained dual tower into the compiler's portable MLP format.

The target format and its feature layout are taken from the compiler's
documented weight-file contract: dimension n + 8 + 9m with canonical angles
(descending), phi, fidelity, per-kind counts, t/h_max and the last-m action
encodings; the feature-spec hash is
sha256("f2-features:v1:n=<n>:m=<m>:h_max=<h>")[:16].
"""

from __future__ import annotations

import hashlib
import json

import numpy as np
import torch
from torch import nn

from .actions import KINDS, alphabet, canonical_angles
from .dataset import FrameSet
from .model import DualTowerValueNet

ACTION_ENC_DIM = 9


def feature_spec_hash(n: int, m: int = 8, h_max: int = 100) -> str:
    key = f"f2-features:v1:n={n}:m={m}:h_max={h_max}"
    return hashlib.sha256(key.encode()).hexdigest()[:16]


def feature_dim(n: int, m: int = 8) -> int:
    return n + 2 + len(KINDS) + 1 + ACTION_ENC_DIM * m


def _encode_action(a, n: int, index: int, n_actions: int) -> np.ndarray:
    out = np.zeros(ACTION_ENC_DIM)
    out[KINDS.index(a.kind)] = 1.0
    out[5] = a.angle
    out[6] = float(a.pauli_weight)
    out[7] = a.site / n
    out[8] = index / n_actions
    return out


def featurize_frames(frames: FrameSet, m: int = 8, h_max: int = 100) -> np.ndarray:
    n = frames.n
    acts = alphabet(n)
    enc = np.stack([_encode_action(a, n, i, len(acts)) for i, a in enumerate(acts)])
    count = len(frames)
    x = np.zeros((count, feature_dim(n, m)))
    states = frames.states.numpy()
    history = frames.history.numpy()
    for row in range(count):
        angles = canonical_angles(states[row])
        x[row, :n] = angles
        x[row, n] = float(np.dot(angles, angles))
        x[row, n + 1] = float(np.prod(np.abs(np.cos(angles / 2))))
        base = n + 2
        hist = history[row]
        hist = hist[hist >= 0]
        for aid in hist:
            x[row, base + KINDS.index(acts[aid].kind)] += 1.0
        x[row, base + 5] = int(frames.t_index[row]) / h_max
        tail = hist[-m:]
        off = base + 6 + (m - len(tail)) * ACTION_ENC_DIM
        for aid in tail:
            x[row, off : off + ACTION_ENC_DIM] = enc[aid]
            off += ACTION_ENC_DIM
    return x


@torch.no_grad()
def teacher_values(model: DualTowerValueNet, frames: FrameSet, batch: int = 256) -> np.ndarray:
    model.eval()
    outs = []
    for lo in range(0, len(frames), batch):
        idx = torch.arange(lo, min(lo + batch, len(frames)))
        outs.append(
            model(frames.states[idx], frames.history[idx], frames.history_len[idx])
        )
    return torch.cat(outs).numpy()


def distill_to_mlp(
    model: DualTowerValueNet,
    frames: FrameSet,
    path,
    hidden=(256, 256),
    steps: int = 2000,
    lr: float = 1e-3,
    seed: int = 0,
    m: int = 8,
    h_max: int = 100,
) -> dict:
    """Fit the portable MLP to the tower's predictions and write the file.

    Returns {"mse": ..., "path": ...} for reporting.
    """
    n = frames.n
    x = torch.tensor(featurize_frames(frames, m, h_max), dtype=torch.float32)
    y = torch.tensor(teacher_values(model, frames), dtype=torch.float32)

    torch.manual_seed(seed)
    dims = [x.shape[1], *hidden, 1]
    layers: list[nn.Module] = []
    for i in range(len(dims) - 1):
        layers.append(nn.Linear(dims[i], dims[i + 1]))
        if i < len(dims) - 2:
            layers.append(nn.ReLU())
    student = nn.Sequential(*layers)
    opt = torch.optim.Adam(student.parameters(), lr=lr)
    gen = torch.Generator().manual_seed(seed + 1)
    for _ in range(steps):
        idx = torch.randint(0, x.shape[0], (min(128, x.shape[0]),), generator=gen)
        loss = ((student(x[idx]).squeeze(-1) - y[idx]) ** 2).mean()
        opt.zero_grad()
        loss.backward()
        opt.step()
    with torch.no_grad():
        mse = float(((student(x).squeeze(-1) - y) ** 2).mean())

    doc = {
        "format": "f2-valuenet",
        "version": 1,
        "feature_spec_hash": feature_spec_hash(n, m, h_max),
        "alpha": float(model.alpha.detach()),
        "beta": float(model.beta.detach()),
        "layers": [],
    }
    linears = [mod for mod in student if isinstance(mod, nn.Linear)]
    for i, lin in enumerate(linears):
        w = lin.weight.detach().numpy()
        doc["layers"].append(
            {
                "rows": w.shape[0],
                "cols": w.shape[1],
                "w": [float(v) for v in w.ravel()],
                "b": [float(v) for v in lin.bias.detach().numpy()],
                "act": "relu" if i < len(linears) - 1 else "identity",
            }
        )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
    return {"mse": mse, "path": str(path)}
