"""Polynomial-time free-fermion simulator over SO(2n) states.

A state holds the 2n x 2n real rotation R describing how a Gaussian unitary
U conjugates the Majorana operators:

    U^dag gamma_c U = sum_a R[c, a] gamma_a

Under that convention R(UV) = R(U) R(V), so applying a discrete Pauli
rotation left-multiplies R by a Givens rotation on the action's Majorana
plane.  The plane table and the per-kind rotation signs below are fixed by
dense-oracle tests (see tests/test_ffsim.py), not taken on faith.

Termination metrics come from the canonical block-diagonal form: the
eigenvalue pairs e^{+-i theta_j} give per-plane angles, the squared sum
phi = sum theta_j^2 is the geometric distance to the identity, and the
trace fidelity of the represented 2^n unitary factorizes as
prod_j |cos(theta_j / 2)| (validated densely up to n = 5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._kernels import apply_givens_seq
from .pauli import classify_term

ORTHO_TOL = 1e-9  # FFState invariant on ||R^T R - I||_max
DRIFT_RENORM = 1e-10  # re-orthonormalize beyond this drift
_CHECK_EVERY = 128  # drift check cadence for single-action application
PAIR_TOL = 1e-8  # eigenvalue-pair matching tolerance

KINDS = ("XX", "YY", "XY", "YX", "Z")

# Rotation sign per kind: effective Givens angle = KIND_SIGN[kind] * action angle.
# Pinned by the dense conjugation oracle; -1 entries are the kinds whose first
# qubit carries Y.
KIND_SIGN = {"XX": 1, "YY": -1, "XY": 1, "YX": -1, "Z": 1}


def action_plane(kind: str, site: int, n: int) -> tuple[int, int]:
    """Majorana plane (a, b) rotated by the given generator kind at site."""
    if kind == "Z":
        if not 0 <= site <= n - 1:
            raise ValueError(f"Z site {site} out of range for n={n}")
        return 2 * site, 2 * site + 1
    if kind not in KIND_SIGN:
        raise ValueError(f"unknown action kind {kind!r}")
    if not 0 <= site <= n - 2:
        raise ValueError(f"{kind} site {site} out of range for n={n}")
    i = site
    if kind == "XX":
        return 2 * i + 1, 2 * i + 2
    if kind == "YY":
        return 2 * i, 2 * i + 3
    if kind == "XY":
        return 2 * i + 1, 2 * i + 3
    return 2 * i, 2 * i + 2  # YX


@dataclass(frozen=True)
class FFState:
    """Residual rotation with a drift counter; treat as immutable."""

    n: int
    R: np.ndarray
    ops: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CanonicalForm:
    angles: np.ndarray  # n entries, |theta_j| in [0, pi], descending
    phi: float


def identity_state(n: int) -> FFState:
    if n < 1:
        raise ValueError("need n >= 1")
    return FFState(n, np.eye(2 * n))


def renormalize(s: FFState) -> FFState:
    """Project R back onto SO(2n) via the polar factor."""
    u, _, vt = np.linalg.svd(s.R)
    return FFState(s.n, u @ vt, 0)


def ortho_drift(r: np.ndarray) -> float:
    d = r.shape[0]
    return float(np.abs(r.T @ r - np.eye(d)).max())


def _from_rotated(n: int, r: np.ndarray, ops: int) -> FFState:
    if ops >= _CHECK_EVERY:
        if ortho_drift(r) > DRIFT_RENORM:
            return renormalize(FFState(n, r))
        ops = 0
    return FFState(n, r, ops)


def apply_action(s: FFState, act) -> FFState:
    """Left-multiply by the action's Givens rotation; O(n) row update."""
    a, b = action_plane(act.kind, act.site, s.n)
    phi = KIND_SIGN[act.kind] * act.sign * math.pi / 2**act.k
    c, sn = math.cos(phi), math.sin(phi)
    r = s.R.copy()
    ra = r[a].copy()
    r[a] = c * ra - sn * r[b]
    r[b] = sn * ra + c * r[b]
    return _from_rotated(s.n, r, s.ops + 1)


def actions_to_rotations(acts, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Plane/angle arrays for a sequence of actions (kernel input)."""
    m = len(acts)
    planes = np.empty((m, 2), dtype=np.int64)
    angles = np.empty(m)
    for i, act in enumerate(acts):
        planes[i] = action_plane(act.kind, act.site, n)
        angles[i] = KIND_SIGN[act.kind] * act.sign * math.pi / 2**act.k
    return planes, angles


def apply_actions(s: FFState, acts) -> FFState:
    """Apply a whole action sequence through the rotation kernel."""
    if not acts:
        return s
    planes, angles = actions_to_rotations(acts, s.n)
    r = s.R.copy()
    apply_givens_seq(r, planes, angles)
    return _from_rotated(s.n, r, s.ops + len(acts))


def canonical_angles(r: np.ndarray) -> np.ndarray:
    """Per-plane rotation angles |theta_j| of R in SO(2n), descending.

    Eigenvalues of a special-orthogonal matrix come in conjugate pairs
    e^{+-i theta}; real +1 pairs give theta = 0 and real -1 eigenvalues
    (even in number since det = +1) give theta = pi.
    """
    args = np.abs(np.angle(np.linalg.eigvals(r)))
    args[::-1].sort()
    lead, trail = args[0::2], args[1::2]
    if np.abs(lead - trail).max(initial=0.0) > PAIR_TOL:
        raise ValueError("eigenvalue pairing failed; matrix is not orthogonal enough")
    return lead


def canonical_angles_batch(rs: np.ndarray) -> np.ndarray:
    """(B, 2n, 2n) -> (B, n) angles, unchecked fast path for search loops.

    Uses the symmetric part: (R + R^T)/2 has eigenvalues cos(theta_j), each
    doubled, so a symmetric solver suffices.  Absolute angle error is about
    sqrt(machine eps) near theta in {0, pi}; callers needing full precision
    (or validation) use canonical_angles.
    """
    sym = (rs + np.swapaxes(rs, -1, -2)) * 0.5
    theta = np.arccos(np.clip(np.linalg.eigvalsh(sym), -1.0, 1.0))
    return np.sort(theta, axis=-1)[..., ::-1][..., 0::2]


def canonical_form(s: FFState) -> CanonicalForm:
    if ortho_drift(s.R) > max(ORTHO_TOL, 10 * DRIFT_RENORM):
        raise ValueError("state violates the orthogonality invariant")
    angles = canonical_angles(s.R)
    return CanonicalForm(angles, float(np.dot(angles, angles)))


def phi(s: FFState) -> float:
    """Squared sum of canonical angles; 0 iff R = I within tolerance."""
    return canonical_form(s).phi


def fidelity_from_angles(angles: np.ndarray) -> float:
    return float(np.prod(np.abs(np.cos(angles / 2))))


def fidelity(s: FFState) -> float:
    """Trace fidelity |Tr U_S| / 2^n of the represented Gaussian unitary."""
    return fidelity_from_angles(canonical_form(s).angles)


def assemble_generator(terms, t: float, n: int | None = None) -> FFState:
    """exp(h t) for the antisymmetric generator h of a free-fermionic sum.

    Every term must classify as free-fermionic; a term w * sign * (-i)
    gamma_a gamma_b contributes h[a, b] -= 2 w sign (the constant is pinned
    by the dense conjugation oracle).
    """
    terms = list(terms)
    if not math.isfinite(t):
        raise ValueError("non-finite evolution time")
    if n is None:
        if not terms:
            raise ValueError("empty term list needs an explicit qubit count")
        n = terms[0].string.n
    h = np.zeros((2 * n, 2 * n))
    for term in terms:
        if term.string.n != n:
            raise ValueError("mixed qubit counts in generator terms")
        ff = classify_term(term)
        if ff is None:
            raise ValueError(f"residual term {term.string.text()!r} in free part")
        a, b = ff.pair
        h[a, b] -= 2.0 * term.coeff * ff.sign
        h[b, a] += 2.0 * term.coeff * ff.sign
    if np.abs(h + h.T).max() > 1e-12:
        raise AssertionError("generator assembly lost antisymmetry")
    return FFState(n, scipy.linalg.expm(h * t))


def is_special_orthogonal(r: np.ndarray, tol: float = ORTHO_TOL) -> bool:
    d = r.shape[0]
    if np.abs(r.T @ r - np.eye(d)).max() > max(tol, 1e-9):
        return False
    sign, _ = np.linalg.slogdet(r)
    return sign > 0
