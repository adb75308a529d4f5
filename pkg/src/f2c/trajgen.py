"""Reversal-generated training trajectories.

Sampling a random action sequence and declaring its product to be the target
makes the same sequence a guaranteed-successful episode: replaying it from
the reset state drives the residual to the identity exactly (up to float
drift).  Frame t is labeled with the return-to-go G_t = -(L - t).

Datasets are JSON Lines holding actions only; every matrix is rebuilt
deterministically on load.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import env, ffsim
from .env import Action, EnvConfig
from .ffsim import FFState

FORMAT_NAME = "f2-episodes"
FORMAT_VERSION = 1
DEFAULT_LENGTHS = (1, 64)


@dataclass(frozen=True)
class Episode:
    n: int
    actions: tuple[Action, ...]
    seed: int


@dataclass(frozen=True)
class Frame:
    """Transition (S_t, A_{t+1}, r=-1, S_{t+1}) with Monte Carlo label G_t."""

    episode: Episode
    t: int
    state: FFState
    action: Action
    next_state: FFState
    g: float


def _episode_seed(dataset_seed: int, index: int) -> int:
    ss = np.random.SeedSequence([dataset_seed, index])
    return int(ss.generate_state(1, np.uint64)[0])


def sample_episode(n: int, length_dist, rng: np.random.Generator, seed: int = 0) -> Episode:
    """Draw a length from [lo, hi] and that many uniform alphabet actions."""
    lo, hi = length_dist
    length = int(rng.integers(lo, hi + 1))
    acts = env.alphabet(n)
    idx = rng.integers(0, len(acts), size=length)
    return Episode(n, tuple(acts[i] for i in idx), seed)


def sample_episodes(
    n: int,
    count: int,
    seed: int,
    length_range: tuple[int, int] = DEFAULT_LENGTHS,
    h_max: int = 100,
) -> list[Episode]:
    """Deterministic batch: episode i uses an rng derived from (seed, i)."""
    lo, hi = length_range
    if not 1 <= lo <= hi <= h_max:
        raise ValueError(f"length range {length_range} outside [1, {h_max}]")
    episodes = []
    for i in range(count):
        ep_seed = _episode_seed(seed, i)
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        episodes.append(sample_episode(n, length_range, rng, seed=ep_seed))
    return episodes


def episode_target(e: Episode) -> FFState:
    """The target rotation defined by the episode's action product."""
    return ffsim.apply_actions(ffsim.identity_state(e.n), e.actions)


def frames(e: Episode) -> list[Frame]:
    """All L transitions, rebuilt by one backward sweep (S_t = G_{t+1}^T S_{t+1})."""
    length = len(e.actions)
    planes, angles = ffsim.actions_to_rotations(e.actions, e.n)
    states = [None] * (length + 1)
    r = np.eye(2 * e.n)
    states[length] = FFState(e.n, r.copy())
    for t in range(length - 1, -1, -1):
        a, b = planes[t]
        c, s = math.cos(angles[t]), math.sin(angles[t])
        ra = r[a].copy()
        # inverse rotation: transpose of E(a, b, angle)
        r[a] = c * ra + s * r[b]
        r[b] = -s * ra + c * r[b]
        states[t] = FFState(e.n, r.copy())
    return [
        Frame(e, t, states[t], e.actions[t], states[t + 1], -(length - t))
        for t in range(length)
    ]


def replay(e: Episode, cfg: EnvConfig | None = None):
    """Run the episode through the environment; returns the final StepResult."""
    if cfg is None:
        cfg = EnvConfig(e.n)
    state = env.reset(episode_target(e), cfg)
    result = None
    for t, act in enumerate(e.actions):
        result = env.step(state, act, t, cfg)
        state = result.state
    return result


def _action_doc(a: Action) -> dict:
    return {"kind": a.kind, "site": a.site, "sign": a.sign, "k": a.k}


def _action_from_doc(doc) -> Action:
    try:
        return Action(doc["kind"], doc["site"], doc["sign"], doc["k"])
    except (TypeError, KeyError, ValueError) as exc:
        raise ValueError(f"invalid action encoding: {exc}") from None


def write_dataset(episodes, path, n: int | None = None, seed: int = 0):
    episodes = list(episodes)
    if n is None:
        if not episodes:
            raise ValueError("empty dataset needs an explicit qubit count")
        n = episodes[0].n
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n_qubits": n,
        "seed": seed,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for e in episodes:
            if e.n != n:
                raise ValueError("mixed qubit counts in dataset")
            fh.write(json.dumps({"actions": [_action_doc(a) for a in e.actions]}) + "\n")


def read_dataset(path) -> tuple[list[Episode], dict]:
    """Load episodes; returns (episodes, header).  Errors carry line numbers."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError("empty dataset file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ValueError(f"line 1: bad header: {exc}") from None
    if header.get("format") != FORMAT_NAME:
        raise ValueError(f"line 1: not a {FORMAT_NAME} file")
    if header.get("version") != FORMAT_VERSION:
        raise ValueError(
            f"line 1: version {header.get('version')} unsupported "
            f"(expected {FORMAT_VERSION})"
        )
    n = header["n_qubits"]
    seed = header.get("seed", 0)
    episodes = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            raise ValueError(f"line {lineno}: truncated or blank line")
        try:
            doc = json.loads(line)
            acts = tuple(_action_from_doc(d) for d in doc["actions"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        episodes.append(Episode(n, acts, _episode_seed(seed, lineno - 2)))
    return episodes, header
