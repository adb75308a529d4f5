"""Brute-force dense ground truth (2^n-dimensional, capped at n <= 10).

Every sign and angle constant elsewhere in the package is pinned against
these routines rather than assumed: Majorana conjugation tables, rotation
constants in gate lowerings, generator assembly and the angle-product
fidelity formula all have tests that compare to matrices built here.
"""

from __future__ import annotations

import numpy as np

from .pauli import Hamiltonian, PauliString, majorana_string

MAX_QUBITS = 10

_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_size(n: int):
    if n > MAX_QUBITS:
        raise ValueError(f"dense oracle capped at n={MAX_QUBITS}, got {n}")


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense matrix of a Pauli string, qubit 0 as the leftmost Kronecker factor."""
    _check_size(p.n)
    m = np.ones((1, 1), dtype=complex)
    for q in range(p.n):
        m = np.kron(m, _1Q[p.letter(q)])
    return m


def hamiltonian_matrix(h: Hamiltonian) -> np.ndarray:
    _check_size(h.n)
    m = np.zeros((2**h.n, 2**h.n), dtype=complex)
    for term in h.terms:
        m += term.coeff * pauli_matrix(term.string)
    return m


def expm_hermitian(h: Hamiltonian, t: float) -> np.ndarray:
    """exp(-i H t) via eigendecomposition of the dense Hermitian sum."""
    m = hamiltonian_matrix(h)
    evals, evecs = np.linalg.eigh(m)
    return (evecs * np.exp(-1j * t * evals)) @ evecs.conj().T


def pauli_rotation(p: PauliString, theta: float) -> np.ndarray:
    """exp(-i theta/2 P), closed form via P^2 = I."""
    dim = 2**p.n
    return np.cos(theta / 2) * np.eye(dim) - 1j * np.sin(theta / 2) * pauli_matrix(p)


def _apply_gate(u: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...], n: int):
    """Left-multiply u by a k-qubit gate embedded on the given qubits."""
    k = len(qubits)
    tensed = u.reshape((2,) * n + (2**n,))
    small = mat.reshape((2,) * (2 * k))
    axes = ([k + i for i in range(k)], list(qubits))
    out = np.tensordot(small, tensed, axes=axes)
    # tensordot put the gate's output axes first; restore qubit positions
    return np.moveaxis(out, range(k), qubits).reshape(2**n, 2**n)


_CX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j]).astype(complex)


def circuit_unitary(c) -> np.ndarray:
    """Unitary of a CircuitIR under the convention list order = execution order."""
    _check_size(c.n)
    u = np.eye(2**c.n, dtype=complex)
    for g in c.gates:
        kind = g.kind
        if kind == "CX":
            u = _apply_gate(u, _CX, g.qubits, c.n)
        elif kind == "RZ":
            mat = np.diag([np.exp(-1j * g.param / 2), np.exp(1j * g.param / 2)])
            u = _apply_gate(u, mat, g.qubits, c.n)
        elif kind == "H":
            u = _apply_gate(u, _H, g.qubits, c.n)
        elif kind == "S":
            u = _apply_gate(u, _S, g.qubits, c.n)
        elif kind == "SDG":
            u = _apply_gate(u, _S.conj().T, g.qubits, c.n)
        elif kind == "X":
            u = _apply_gate(u, _1Q["X"], g.qubits, c.n)
        else:
            raise ValueError(f"unsupported gate kind {kind!r}")
    return u


def trace_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|Tr(U^dag V)| / d; global-phase invariant, 1 iff equal up to phase."""
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    return abs(np.trace(u.conj().T @ v)) / d


def majorana_matrix(index: int, n: int) -> np.ndarray:
    return pauli_matrix(majorana_string(index, n))


def majorana_conjugation(u: np.ndarray, n: int) -> np.ndarray:
    """The 2n x 2n real matrix R with U^dag gamma_c U = sum_a R[c,a] gamma_a.

    This is the ground-truth image of a Gaussian unitary in the SO(2n)
    representation the simulator evolves.
    """
    _check_size(n)
    d = 2**n
    gammas = [majorana_matrix(a, n) for a in range(2 * n)]
    r = np.empty((2 * n, 2 * n))
    for c in range(2 * n):
        conj = u.conj().T @ gammas[c] @ u
        for a in range(2 * n):
            coeff = np.trace(gammas[a] @ conj) / d
            r[c, a] = coeff.real
    return r
