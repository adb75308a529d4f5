"""Hot numeric kernels: plane-rotation sweeps over SO(2n) matrices.

Two implementations of each kernel exist: a numba ``@njit`` version and a
pure-numpy twin.  The active backend is chosen once at import time from the
``F2C_BACKEND`` environment variable (``auto`` | ``numba`` | ``numpy``;
default ``auto`` = numba when importable).  ``benchmarks/bench_kernels.py``
compares the two.
"""

from __future__ import annotations

import math
import os

import numpy as np

_REQUESTED = os.environ.get("F2C_BACKEND", "auto").lower()
if _REQUESTED not in ("auto", "numba", "numpy"):
    raise ValueError(f"F2C_BACKEND must be auto|numba|numpy, got {_REQUESTED!r}")

_HAVE_NUMBA = False
if _REQUESTED in ("auto", "numba"):
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _REQUESTED == "numba":
            raise


# ---------------------------------------------------------------- numpy twins


def _apply_givens_seq_np(r, planes, angles):
    """In place: r <- G_m ... G_1 r, G_k the plane rotation E(a_k, b_k, phi_k).

    E(a, b, phi) acts as row_a' = c*row_a - s*row_b ; row_b' = s*row_a + c*row_b.
    """
    for k in range(planes.shape[0]):
        a = planes[k, 0]
        b = planes[k, 1]
        c = math.cos(angles[k])
        s = math.sin(angles[k])
        ra = r[a].copy()
        r[a] = c * ra - s * r[b]
        r[b] = s * ra + c * r[b]
    return r


def _adjacent_factor_np(m):
    """Factor special-orthogonal m into adjacent-plane rotations.

    Returns (planes, angles) such that applying E(p_k, p_k+1, phi_k) for
    k = 0..cnt-1 in order (left-multiplying) reduces m to the identity.
    Entries are zeroed column by column from the bottom with rotations on
    adjacent row pairs only; where a rotation is applied the new diagonal
    entry is nonnegative, so the triangular remainder is diagonal with +-1
    entries.  Remaining -1 entries (possible when whole columns were already
    zero, e.g. exact pi-rotation blocks) come in pairs and are swept out by
    adjacent pi rotations.  Raises on det = -1 input.
    """
    d = m.shape[0]
    work = m.copy()
    max_rot = d * (d - 1) // 2 + d
    planes = np.empty((max_rot, 2), dtype=np.int64)
    angles = np.empty(max_rot)
    cnt = 0
    for col in range(d - 1):
        for row in range(d - 1, col, -1):
            lo = work[row, col]
            hi = work[row - 1, col]
            if abs(lo) < 1e-14:
                continue
            rad = math.hypot(hi, lo)
            c = hi / rad
            s = -lo / rad
            ra = work[row - 1].copy()
            work[row - 1] = c * ra - s * work[row]
            work[row] = s * ra + c * work[row]
            planes[cnt, 0] = row - 1
            planes[cnt, 1] = row
            angles[cnt] = math.atan2(s, c)
            cnt += 1
    # a pi rotation on plane (p, p+1) negates both rows: walking one along
    # moves a lone -1 right one slot until it annihilates with the next one
    neg = -1
    for p in range(d):
        if work[p, p] < 0.0:
            if neg < 0:
                neg = p
            else:
                for q in range(neg, p):
                    work[q] = -work[q]
                    work[q + 1] = -work[q + 1]
                    planes[cnt, 0] = q
                    planes[cnt, 1] = q + 1
                    angles[cnt] = math.pi
                    cnt += 1
                neg = -1
    if neg >= 0:
        raise ValueError("matrix has determinant -1; not in SO(d)")
    return planes[:cnt].copy(), angles[:cnt].copy()


# ---------------------------------------------------------------- numba twins

if _HAVE_NUMBA:

    @njit(cache=True)
    def _apply_givens_seq_nb(r, planes, angles):  # pragma: no cover - jitted
        d = r.shape[1]
        for k in range(planes.shape[0]):
            a = planes[k, 0]
            b = planes[k, 1]
            c = math.cos(angles[k])
            s = math.sin(angles[k])
            for j in range(d):
                ra = r[a, j]
                rb = r[b, j]
                r[a, j] = c * ra - s * rb
                r[b, j] = s * ra + c * rb
        return r

    @njit(cache=True)
    def _adjacent_factor_nb(m):  # pragma: no cover - jitted
        d = m.shape[0]
        work = m.copy()
        max_rot = d * (d - 1) // 2 + d
        planes = np.empty((max_rot, 2), dtype=np.int64)
        angles = np.empty(max_rot)
        cnt = 0
        for col in range(d - 1):
            for row in range(d - 1, col, -1):
                lo = work[row, col]
                hi = work[row - 1, col]
                if abs(lo) < 1e-14:
                    continue
                rad = math.hypot(hi, lo)
                c = hi / rad
                s = -lo / rad
                for j in range(d):
                    ra = work[row - 1, j]
                    rb = work[row, j]
                    work[row - 1, j] = c * ra - s * rb
                    work[row, j] = s * ra + c * rb
                planes[cnt, 0] = row - 1
                planes[cnt, 1] = row
                angles[cnt] = math.atan2(s, c)
                cnt += 1
        neg = -1
        for p in range(d):
            if work[p, p] < 0.0:
                if neg < 0:
                    neg = p
                else:
                    for q in range(neg, p):
                        for j in range(d):
                            work[q, j] = -work[q, j]
                            work[q + 1, j] = -work[q + 1, j]
                        planes[cnt, 0] = q
                        planes[cnt, 1] = q + 1
                        angles[cnt] = math.pi
                        cnt += 1
                    neg = -1
        ok = neg < 0
        return planes[:cnt].copy(), angles[:cnt].copy(), ok

    def _adjacent_factor_nb_checked(m):
        planes, angles, ok = _adjacent_factor_nb(m)
        if not ok:
            raise ValueError("matrix has determinant -1; not in SO(d)")
        return planes, angles


BACKEND = "numba" if _HAVE_NUMBA else "numpy"

if BACKEND == "numba":
    apply_givens_seq = _apply_givens_seq_nb
    adjacent_factor = _adjacent_factor_nb_checked
else:
    apply_givens_seq = _apply_givens_seq_np
    adjacent_factor = _adjacent_factor_np


def get_backend() -> str:
    """Active kernel backend, 'numba' or 'numpy'."""
    return BACKEND
