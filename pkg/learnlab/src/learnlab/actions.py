"""Action semantics of the f2-episodes dataset format.

Everything here is re-derived from the compiler's documented file-format
contract (its README "File formats" section), not imported from it: the
Majorana plane table, rotation signs, alphabet ordering and the episode
replay rule.  Keeping this independent pins the cross-package boundary to
the documents rather than to code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KINDS = ("XX", "YY", "XY", "YX", "Z")
K_MAX = 20
SIGNS = (1, -1)

# plane (a, b) rotated by (kind, site) and the orientation sigma
_PLANE = {
    "Z": lambda i: (2 * i, 2 * i + 1),
    "XX": lambda i: (2 * i + 1, 2 * i + 2),
    "YY": lambda i: (2 * i, 2 * i + 3),
    "XY": lambda i: (2 * i + 1, 2 * i + 3),
    "YX": lambda i: (2 * i, 2 * i + 2),
}
SIGMA = {"XX": 1, "YY": -1, "XY": 1, "YX": -1, "Z": 1}


@dataclass(frozen=True)
class Action:
    kind: str
    site: int
    sign: int
    k: int

    @property
    def angle(self) -> float:
        return self.sign * math.pi / 2**self.k

    @property
    def pauli_weight(self) -> int:
        return 1 if self.kind == "Z" else 2


def alphabet(n: int) -> list[Action]:
    """Kinds (XX, YY, XY, YX, Z), site ascending, sign +1 then -1, k 1..20."""
    acts = []
    for kind in KINDS:
        top = n if kind == "Z" else n - 1
        for site in range(top):
            for sign in SIGNS:
                for k in range(1, K_MAX + 1):
                    acts.append(Action(kind, site, sign, k))
    return acts


def plane(a: Action) -> tuple[int, int]:
    return _PLANE[a.kind](a.site)


def apply_action(r: np.ndarray, a: Action) -> None:
    """In place left-multiply by E(plane, sigma * angle)."""
    lo, hi = plane(a)
    phi = SIGMA[a.kind] * a.angle
    c, s = math.cos(phi), math.sin(phi)
    row_lo = r[lo].copy()
    r[lo] = c * row_lo - s * r[hi]
    r[hi] = s * row_lo + c * r[hi]


def episode_states(n: int, acts: list[Action]) -> list[np.ndarray]:
    """S_0 .. S_L for a reversal episode: target^T, then each action applied."""
    target = np.eye(2 * n)
    for a in acts:
        apply_action(target, a)
    states = [target.T.copy()]
    for a in acts:
        nxt = states[-1].copy()
        apply_action(nxt, a)
        states.append(nxt)
    return states


def canonical_angles(r: np.ndarray) -> np.ndarray:
    """|theta_j| of the SO(2n) block form, descending (eigenvalue pairs)."""
    args = np.abs(np.angle(np.linalg.eigvals(r)))
    args[::-1].sort()
    return args[0::2]


def geometric_phi(r: np.ndarray) -> float:
    angles = canonical_angles(r)
    return float(np.dot(angles, angles))


def fidelity(r: np.ndarray) -> float:
    return float(np.prod(np.abs(np.cos(canonical_angles(r) / 2))))
