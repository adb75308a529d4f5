"""Deterministic MDP for free-fermion circuit synthesis.

States are residual rotations (ffsim.FFState), actions are discrete Pauli
rotations exp(-i theta/2 P) with P from the nearest-neighbor free-fermionic
generating set and theta = +-pi/2^k for k = 1..20.  Every transition pays
reward -1; an episode ends on success (trace fidelity above 1 - epsilon) or
at the hard horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ffsim
from .ffsim import KINDS, FFState

K_MAX = 20
SIGNS = (1, -1)

# Certified fidelity ceiling whenever ||R - I||_max > 0.5: the largest
# canonical angle then satisfies 2|sin(theta/2)| >= 0.5, so the fidelity
# product is at most sqrt(1 - 1/16) < 0.9683.
_FAR_CUTOFF = 0.5
_FAR_FIDELITY_BOUND = 0.9683


@dataclass(frozen=True)
class Action:
    """One alphabet element: rotation exp(-i sign pi/2^k / 2 * P_kind(site))."""

    kind: str
    site: int
    sign: int
    k: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.sign not in SIGNS:
            raise ValueError(f"sign must be +-1, got {self.sign}")
        if not 1 <= self.k <= K_MAX:
            raise ValueError(f"k must be in [1, {K_MAX}], got {self.k}")
        if self.site < 0:
            raise ValueError(f"negative site {self.site}")

    @property
    def angle(self) -> float:
        return self.sign * math.pi / 2**self.k


@dataclass(frozen=True)
class EnvConfig:
    n: int
    epsilon: float = 1e-6
    h_max: int = 100

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.h_max < 1:
            raise ValueError("h_max must be >= 1")


@dataclass(frozen=True)
class StepResult:
    state: FFState
    reward: float
    done: bool
    success: bool
    fidelity: float


def alphabet(n: int) -> list[Action]:
    """All 40 (5n - 4) actions in the fixed order (kind, site, sign, k).

    Kinds iterate as (XX, YY, XY, YX, Z), sites ascending, sign +1 before -1,
    k ascending.  The position of an action in this list is its stable global
    index, used by feature encodings and dataset tooling.
    """
    if n < 2:
        raise ValueError("alphabet needs n >= 2")
    acts = []
    for kind in KINDS:
        max_site = n - 1 if kind == "Z" else n - 2
        for site in range(max_site + 1):
            for sign in SIGNS:
                for k in range(1, K_MAX + 1):
                    acts.append(Action(kind, site, sign, k))
    return acts


def alphabet_index(n: int) -> dict[Action, int]:
    return {a: i for i, a in enumerate(alphabet(n))}


def reset(target: FFState, cfg: EnvConfig) -> FFState:
    """Initial residual S_0 = R(target)^T, i.e. the inverse rotation."""
    if target.n != cfg.n:
        raise ValueError(f"target n={target.n} does not match config n={cfg.n}")
    if not ffsim.is_special_orthogonal(target.R):
        raise ValueError("target is not special orthogonal (det must be +1)")
    return FFState(cfg.n, target.R.T.copy())


def _step_fidelity(state: FFState, cfg: EnvConfig) -> tuple[float, bool]:
    r = state.R
    d = r.shape[0]
    far = np.abs(r - np.eye(d)).max() > _FAR_CUTOFF
    if far:
        # cannot be terminal; skip the eigendecomposition and report the
        # certified ceiling instead of the exact fidelity
        return _FAR_FIDELITY_BOUND, False
    fid = ffsim.fidelity_from_angles(ffsim.canonical_angles(r))
    return fid, fid > 1 - cfg.epsilon


def step(s: FFState, a: Action, t: int, cfg: EnvConfig) -> StepResult:
    """Apply one action at step index t (0-based); reward is always -1."""
    if t >= cfg.h_max:
        raise ValueError(f"step at t={t} after the episode horizon {cfg.h_max}")
    nxt = ffsim.apply_action(s, a)
    fid, success = _step_fidelity(nxt, cfg)
    done = success or (t + 1 == cfg.h_max)
    return StepResult(nxt, -1.0, done, success, fid)


def is_terminal(s: FFState, cfg: EnvConfig) -> bool:
    return _step_fidelity(s, cfg)[1]
