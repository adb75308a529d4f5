"""Load f2-episodes JSONL files into frame tensors.

Each frame carries the residual matrix S_t, the action history, the
return-to-go label G_t = -(L - t) and the geometric distance phi(S_t).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import torch

from .actions import Action, alphabet, episode_states, geometric_phi


@dataclass
class FrameSet:
    """Flat frame storage; histories are alphabet indices, -1 padded."""

    n: int
    states: torch.Tensor  # (F, 2n, 2n) float64 (model casts at input)
    history: torch.Tensor  # (F, T_max) long, -1 = empty slot
    history_len: torch.Tensor  # (F,) long
    g: torch.Tensor  # (F,) float32
    phi: torch.Tensor  # (F,) float32
    t_index: torch.Tensor  # (F,) long
    episode_len: torch.Tensor  # (F,) long
    episode_id: torch.Tensor  # (F,) long

    def __len__(self):
        return self.states.shape[0]

    @property
    def n_actions(self) -> int:
        return len(alphabet(self.n))


def read_episodes(path) -> tuple[int, list[list[Action]]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = json.loads(lines[0])
    if header.get("format") != "f2-episodes" or header.get("version") != 1:
        raise ValueError(f"{path} is not a v1 f2-episodes file")
    n = header["n_qubits"]
    episodes = []
    for line in lines[1:]:
        doc = json.loads(line)
        episodes.append(
            [Action(d["kind"], d["site"], d["sign"], d["k"]) for d in doc["actions"]]
        )
    return n, episodes


def load_frames(path, limit_episodes: int | None = None) -> FrameSet:
    n, episodes = read_episodes(path)
    if limit_episodes is not None:
        episodes = episodes[:limit_episodes]
    index = {a: i for i, a in enumerate(alphabet(n))}
    t_max = max((len(e) for e in episodes), default=1)

    states, rows, lens, gs, phis, ts, ep_lens, ep_ids = [], [], [], [], [], [], [], []
    for ep_id, acts in enumerate(episodes):
        length = len(acts)
        trail = episode_states(n, acts)
        for t in range(length):
            states.append(trail[t])
            row = np.full(t_max, -1, dtype=np.int64)
            for j, a in enumerate(acts[:t]):
                row[j] = index[a]
            rows.append(row)
            lens.append(t)
            gs.append(-(length - t))
            phis.append(geometric_phi(trail[t]))
            ts.append(t)
            ep_lens.append(length)
            ep_ids.append(ep_id)
    return FrameSet(
        n=n,
        states=torch.tensor(np.array(states), dtype=torch.float64),
        history=torch.tensor(np.array(rows)),
        history_len=torch.tensor(lens),
        g=torch.tensor(gs, dtype=torch.float32),
        phi=torch.tensor(phis, dtype=torch.float32),
        t_index=torch.tensor(ts),
        episode_len=torch.tensor(ep_lens),
        episode_id=torch.tensor(ep_ids),
    )


def split_frames(frames: FrameSet, eval_fraction: float, seed: int) -> tuple[FrameSet, FrameSet]:
    """Split by episode, so held-out frames come from unseen trajectories."""
    ep_ids = frames.episode_id.numpy()
    episodes = np.unique(ep_ids)
    rng = np.random.default_rng(seed)
    order = rng.permutation(episodes)
    cut = max(1, int(len(episodes) * eval_fraction))
    eval_set = set(order[:cut].tolist())
    mask = np.array([e in eval_set for e in ep_ids])
    eval_idx, train_idx = np.nonzero(mask)[0], np.nonzero(~mask)[0]

    def take(idx):
        idx = torch.tensor(idx)
        return FrameSet(
            frames.n,
            frames.states[idx],
            frames.history[idx],
            frames.history_len[idx],
            frames.g[idx],
            frames.phi[idx],
            frames.t_index[idx],
            frames.episode_len[idx],
            frames.episode_id[idx],
        )

    return take(train_idx), take(eval_idx)
