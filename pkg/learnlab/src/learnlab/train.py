"""Monte Carlo training of the dual-tower value net.

Three objectives:

* ``geometric_reg``: Huber(V - G) plus the learned anchor
  (V - (alpha + beta * phi))^2 with alpha, beta trained jointly;
* ``plain``: Huber(V - G) alone;
* ``shaped``: Huber against potential-shaped returns
  G - beta_shape * phi(S_t), the telescoped form of
  r_t = -1 + beta (phi(S_{t+1}) - phi(S_t)) with a flat beta.

Eval curves always report plain Huber against the raw returns so arms and
embedding modes are compared on the same scale.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import torch

from .dataset import FrameSet, load_frames, split_frames
from .model import DualTowerConfig, DualTowerValueNet

OBJECTIVES = ("geometric_reg", "plain", "shaped")


@dataclass(frozen=True)
class TrainRunConfig:
    model: DualTowerConfig
    steps: int = 600
    batch_size: int = 64
    lr: float = 1e-3
    seed: int = 0
    huber_delta: float = 1.0
    objective: str = "geometric_reg"
    shaped_beta: float = 2.0
    eval_fraction: float = 0.15
    eval_every: int = 50
    torch_threads: int = 1  # tiny models thrash on many-core defaults

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")


def _labels(frames: FrameSet, cfg: TrainRunConfig) -> torch.Tensor:
    if cfg.objective == "shaped":
        return frames.g - cfg.shaped_beta * frames.phi
    return frames.g


def _batch_loss(model, frames, idx, labels, cfg) -> torch.Tensor:
    v = model(frames.states[idx], frames.history[idx], frames.history_len[idx])
    huber = torch.nn.functional.huber_loss(
        v, labels[idx], delta=cfg.huber_delta
    )
    if cfg.objective == "geometric_reg":
        anchor = model.alpha + model.beta * frames.phi[idx]
        return huber + ((v - anchor) ** 2).mean()
    return huber


@torch.no_grad()
def eval_huber(model, frames: FrameSet, delta: float = 1.0, batch: int = 256) -> float:
    model.eval()
    total, count = 0.0, 0
    for lo in range(0, len(frames), batch):
        idx = torch.arange(lo, min(lo + batch, len(frames)))
        v = model(frames.states[idx], frames.history[idx], frames.history_len[idx])
        total += float(
            torch.nn.functional.huber_loss(
                v, frames.g[idx], delta=delta, reduction="sum"
            )
        )
        count += len(idx)
    model.train()
    return total / count


def train_dual_tower(
    data, cfg: TrainRunConfig
) -> tuple[DualTowerValueNet, list[dict]]:
    """Train on a FrameSet or a dataset path; returns (model, curve rows)."""
    frames = data if isinstance(data, FrameSet) else load_frames(data)
    if frames.n != cfg.model.n:
        raise ValueError(f"dataset n={frames.n} does not match model n={cfg.model.n}")
    train_set, eval_set = split_frames(frames, cfg.eval_fraction, cfg.seed)

    torch.set_num_threads(cfg.torch_threads)
    torch.manual_seed(cfg.seed)
    model = DualTowerValueNet(cfg.model)
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    labels = _labels(train_set, cfg)
    gen = torch.Generator().manual_seed(cfg.seed + 1)

    curve = []
    for step in range(1, cfg.steps + 1):
        idx = torch.randint(0, len(train_set), (cfg.batch_size,), generator=gen)
        loss = _batch_loss(model, train_set, idx, labels, cfg)
        if not torch.isfinite(loss):
            raise RuntimeError(f"training diverged at step {step}")
        opt.zero_grad()
        loss.backward()
        opt.step()
        if step % cfg.eval_every == 0 or step == cfg.steps:
            curve.append(
                {
                    "step": step,
                    "train_loss": float(loss.detach()),
                    "eval_loss": eval_huber(model, eval_set, cfg.huber_delta),
                }
            )
    return model, curve


def write_curve_csv(curve: list[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["step", "train_loss", "eval_loss"])
        writer.writeheader()
        writer.writerows(curve)
