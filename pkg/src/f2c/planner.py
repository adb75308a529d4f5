"""Synthesis policies over the discrete rotation alphabet.

Three routes produce action plans for a free-fermionic target:

* value-guided greedy/beam rollout (net scores every successor),
* the geometric baseline (score = -phi of the successor),
* a deterministic Givens-QR fallback that factors the target into
  adjacent-plane rotations (Z and XX planes cover every adjacent Majorana
  pair) and discretizes each angle within a per-angle budget, so it always
  succeeds on det = +1 targets.

Successor scoring is batched: one stacked eigendecomposition per step covers
the whole alphabet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import ffsim, value_model
from ._kernels import adjacent_factor, apply_givens_seq
from .env import Action, alphabet
from .ffsim import FFState
from .value_model import FeatureSpec, ValueNet

ANGLE_FLOOR = math.pi / 2**21  # half the smallest alphabet step
_MAX_DIGITS = 64
_FALLBACK_RETRIES = 3


@dataclass(frozen=True)
class SearchConfig:
    beam: int = 1
    epsilon: float = 1e-6
    h_max: int = 100
    tie_break: str = "phi"  # "phi" (value, phi, index) or "index" (value, index)
    fallback_on_failure: bool = True

    def __post_init__(self):
        if self.beam < 1:
            raise ValueError("beam width must be >= 1")
        if self.tie_break not in ("phi", "index"):
            raise ValueError(f"unknown tie-break mode {self.tie_break!r}")


@dataclass(frozen=True)
class PlanResult:
    actions: tuple[Action, ...]
    success: bool
    final_fidelity: float
    steps: int
    method: str


def discretize_angle(theta: float, tol: float = ANGLE_FLOOR) -> list[tuple[int, int]]:
    """Greedy signed expansion of theta over {+-pi/2^k, k=1..20}.

    Returns (sign, k) digits whose sum approximates theta (reduced into
    (-pi, pi]) within max(tol, pi/2^21).  Ties between neighboring k prefer
    the smaller step.
    """
    r = math.remainder(theta, 2 * math.pi)
    tol = max(tol, ANGLE_FLOOR)
    digits: list[tuple[int, int]] = []
    while abs(r) > tol and len(digits) < _MAX_DIGITS:
        sign = 1 if r > 0 else -1
        best_k, best_res = 1, abs(abs(r) - math.pi / 2)
        for k in range(2, 21):
            res = abs(abs(r) - math.pi / 2**k)
            if res <= best_res:  # tie prefers larger k (smaller angle)
                best_k, best_res = k, res
        digits.append((sign, best_k))
        r -= sign * math.pi / 2**best_k
    return digits


# ------------------------------------------------------------------ rollouts


@dataclass
class _Beam:
    r: np.ndarray
    actions: list[Action] = field(default_factory=list)


def _successors(r: np.ndarray, planes: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """All rotated copies G_k @ r, one per alphabet entry; vectorized rows."""
    count = planes.shape[0]
    out = np.broadcast_to(r, (count, *r.shape)).copy()
    ra = r[planes[:, 0]]
    rb = r[planes[:, 1]]
    c = np.cos(angles)[:, None]
    s = np.sin(angles)[:, None]
    rows = np.arange(count)
    out[rows, planes[:, 0]] = c * ra - s * rb
    out[rows, planes[:, 1]] = s * ra + c * rb
    return out


def _angles_phi_fid(states: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    angles = ffsim.canonical_angles_batch(states)
    phi = np.einsum("bi,bi->b", angles, angles)
    fid = np.prod(np.abs(np.cos(angles / 2)), axis=1)
    return angles, phi, fid


class _NetScorer:
    """Builds candidate feature rows incrementally and evaluates the net."""

    def __init__(self, net: ValueNet, n: int, cfg: SearchConfig):
        self.net = net
        # feature layout is the canonical spec for n; the search horizon is a
        # separate knob and must not change the t/h_max normalization
        self.spec = FeatureSpec(n)
        if net.feature_spec_hash != self.spec.hash:
            raise ValueError("model feature spec does not match this environment")
        self.enc = value_model.action_encoding_table_cached(n)
        acts = alphabet(n)
        self.kind_onehot = np.zeros((len(acts), 5))
        for i, a in enumerate(acts):
            self.kind_onehot[i, ffsim.KINDS.index(a.kind)] = 1.0
        self.idx = value_model.alphabet_index_cached(n)

    def __call__(self, item: _Beam, t, angles, phi, fid) -> np.ndarray:
        spec = self.spec
        count = angles.shape[0]
        x = np.zeros((count, spec.dim))
        x[:, : spec.n] = angles
        x[:, spec.n] = phi
        x[:, spec.n + 1] = fid
        base = spec.n + 2
        counts = np.zeros(5)
        for a in item.actions:
            counts[ffsim.KINDS.index(a.kind)] += 1.0
        x[:, base : base + 5] = counts + self.kind_onehot
        x[:, base + 5] = (t + 1) / spec.h_max
        tail = item.actions[-(spec.m - 1) :] if spec.m > 1 else []
        off = base + 6 + (spec.m - 1 - len(tail)) * value_model.ACTION_ENC_DIM
        for a in tail:
            x[:, off : off + value_model.ACTION_ENC_DIM] = self.enc[self.idx[a]]
            off += value_model.ACTION_ENC_DIM
        x[:, off : off + value_model.ACTION_ENC_DIM] = self.enc
        return value_model.forward(self.net, x)


def _phi_scorer(item, t, angles, phi, fid) -> np.ndarray:
    return -phi


def _run_search(target: FFState, scorer, cfg: SearchConfig, method: str) -> PlanResult:
    n = target.n
    if not ffsim.is_special_orthogonal(target.R):
        raise ValueError("target is not special orthogonal (det must be +1)")
    start = target.R.T.copy()
    fid0 = ffsim.fidelity_from_angles(ffsim.canonical_angles(start))
    if fid0 > 1 - cfg.epsilon:
        return PlanResult((), True, fid0, 0, method)

    planes, rot_angles = ffsim.actions_to_rotations(alphabet(n), n)
    beams = [_Beam(start)]
    for t in range(cfg.h_max):
        pool_scores, pool_phi, pool_meta = [], [], []
        best_success: tuple[float, _Beam, int] | None = None
        pool_states = []
        for item in beams:
            states = _successors(item.r, planes, rot_angles)
            angles, phi, fid = _angles_phi_fid(states)
            hit = fid > 1 - cfg.epsilon
            if hit.any():
                # confirm with the exact (checked) angle path before stopping
                j = int(np.argmax(np.where(hit, fid, -np.inf)))
                exact = ffsim.fidelity_from_angles(ffsim.canonical_angles(states[j]))
                if exact > 1 - cfg.epsilon:
                    if best_success is None or exact > best_success[0]:
                        best_success = (exact, item, j)
                    continue
            scores = scorer(item, t, angles, phi, fid)
            pool_scores.append(scores)
            pool_phi.append(phi)
            pool_states.append(states)
            pool_meta.append(item)
        if best_success is not None:
            exact_fid, item, j = best_success
            acts = alphabet(n)
            return PlanResult(
                tuple(item.actions) + (acts[j],), True, exact_fid,
                len(item.actions) + 1, method,
            )
        scores = np.concatenate(pool_scores)
        phis = np.concatenate(pool_phi)
        order_idx = np.arange(scores.shape[0])
        if cfg.tie_break == "phi":
            ranking = np.lexsort((order_idx, phis, -scores))
        else:
            ranking = np.lexsort((order_idx, -scores))
        width = pool_states[0].shape[0]
        acts = alphabet(n)
        new_beams = []
        for flat in ranking[: cfg.beam]:
            parent = pool_meta[flat // width]
            j = flat % width
            new_beams.append(_Beam(pool_states[flat // width][j].copy(),
                                   parent.actions + [acts[j]]))
        beams = new_beams
    # horizon exhausted: report the best beam's state
    final = beams[0]
    fid = ffsim.fidelity_from_angles(ffsim.canonical_angles(final.r))
    return PlanResult(tuple(final.actions), False, fid, len(final.actions), method)


def greedy_rollout(target: FFState, net: ValueNet, cfg: SearchConfig) -> PlanResult:
    """Value-guided search; beam width comes from the config (1 = greedy)."""
    scorer = _NetScorer(net, target.n, cfg)
    return _run_search(target, scorer, cfg, "beam" if cfg.beam > 1 else "greedy")


def heuristic_rollout(target: FFState, cfg: SearchConfig) -> PlanResult:
    """Model-free baseline: pure geometric descent on phi."""
    return _run_search(target, _phi_scorer, cfg, "greedy")


# ------------------------------------------------------------------ fallback


def _rotation_to_actions(plane_lo: int, theta: float, tol: float) -> list[Action]:
    if plane_lo % 2 == 0:
        kind, site = "Z", plane_lo // 2
    else:
        kind, site = "XX", (plane_lo - 1) // 2
    # both kinds rotate with positive orientation (KIND_SIGN = +1)
    return [Action(kind, site, s, k) for s, k in discretize_angle(theta, tol)]


def _fallback_once(target: FFState, planes, angles, tol) -> tuple[list[Action], float]:
    acts: list[Action] = []
    for k in range(planes.shape[0] - 1, -1, -1):
        acts.extend(_rotation_to_actions(planes[k, 0], -angles[k], tol))
    residual = target.R.T.copy()
    if acts:
        p, a = ffsim.actions_to_rotations(acts, target.n)
        apply_givens_seq(residual, p, a)
    fid = ffsim.fidelity_from_angles(ffsim.canonical_angles(residual))
    return acts, fid


def fallback_compile(target: FFState, epsilon: float = 1e-6) -> PlanResult:
    """Deterministic complete compiler: factor, discretize, verify.

    The per-angle budget sqrt(8 epsilon / count) equalizes the composed
    infidelity across rotations; the realized fidelity is verified and the
    budget tightened (x1/4, floored at pi/2^21) in the unlikely event the
    incoherent-composition estimate falls short.
    """
    planes, angles = adjacent_factor(target.R)
    count = max(1, planes.shape[0])
    tol = max(math.sqrt(8.0 * epsilon / count), ANGLE_FLOOR)
    for _ in range(_FALLBACK_RETRIES + 1):
        acts, fid = _fallback_once(target, planes, angles, tol)
        if fid > 1 - epsilon:
            return PlanResult(tuple(acts), True, fid, len(acts), "fallback")
        if tol <= ANGLE_FLOOR:
            break
        tol = max(tol / 4.0, ANGLE_FLOOR)
    raise RuntimeError(
        f"fallback could not reach fidelity 1 - {epsilon:g} (best {fid:.3e} short)"
    )


def compile_free_part(
    target: FFState, net: ValueNet | None, cfg: SearchConfig
) -> PlanResult:
    """Search with the net (or the geometric baseline), fallback on failure."""
    if net is not None:
        result = greedy_rollout(target, net, cfg)
    else:
        result = heuristic_rollout(target, cfg)
    if result.success or not cfg.fallback_on_failure:
        return result
    backstop = fallback_compile(target, cfg.epsilon)
    return PlanResult(
        backstop.actions, backstop.success, backstop.final_fidelity, backstop.steps,
        "hybrid",
    )
