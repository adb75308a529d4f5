"""Pauli-string algebra on a symplectic bit-mask encoding.

A length-n Pauli string is stored as two n-bit integers ``(x_mask, z_mask)``;
bit ``q`` of each mask encodes the letter on qubit ``q``:

    (0, 0) = I    (1, 0) = X    (0, 1) = Z    (1, 1) = Y

Qubit 0 is the leftmost letter in text form and the leftmost Kronecker factor
in matrix form.  Products track their phase explicitly; commutation checks
reduce to popcounts on the masks.

The free-fermionic classifier maps a string to a quadratic Majorana monomial
under the fixed convention that qubit ``i`` owns Majorana indices ``2i``
(X-type) and ``2i+1`` (Y-type), each dressed with the Z-string prefix on
qubits ``< i``.  All sign constants implied by that convention are pinned by
dense-matrix tests, not assumed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_TO_LETTER = {v: k for k, v in _LETTER_TO_BITS.items()}

# i**e lookup for phase exponents mod 4
_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)

ZERO_DROP = 1e-15


@dataclass(frozen=True)
class PauliString:
    """Immutable n-qubit Pauli string."""

    n: int
    x_mask: int
    z_mask: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one qubit, got n={self.n}")
        full = (1 << self.n) - 1
        if not (0 <= self.x_mask <= full and 0 <= self.z_mask <= full):
            raise ValueError("mask exceeds qubit count")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse e.g. ``"XZY"`` (qubit 0 leftmost)."""
        if not text:
            raise ValueError("empty Pauli string")
        x = z = 0
        for q, letter in enumerate(text):
            try:
                xb, zb = _LETTER_TO_BITS[letter]
            except KeyError:
                raise ValueError(f"bad Pauli letter {letter!r} at qubit {q}") from None
            x |= xb << q
            z |= zb << q
        return cls(len(text), x, z)

    def text(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    def letter(self, q: int) -> str:
        return _BITS_TO_LETTER[(self.x_mask >> q) & 1, (self.z_mask >> q) & 1]

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def __str__(self) -> str:
        return self.text()


@dataclass(frozen=True)
class PauliTerm:
    """A Pauli string with a real, nonzero coefficient."""

    string: PauliString
    coeff: float

    def __post_init__(self):
        if not math.isfinite(self.coeff):
            raise ValueError(f"non-finite coefficient {self.coeff!r}")
        if self.coeff == 0.0:
            raise ValueError("zero coefficient; drop the term instead")


@dataclass(frozen=True)
class Hamiltonian:
    """Weighted sum of Pauli strings on a common qubit count.

    Duplicate strings are merged (coefficients summed) and terms whose merged
    coefficient falls below ``ZERO_DROP`` in magnitude are removed.  Term
    order is input order after the merge.
    """

    n: int
    terms: tuple[PauliTerm, ...]

    @classmethod
    def build(cls, n: int, terms) -> "Hamiltonian":
        merged: dict[tuple[int, int], float] = {}
        order: list[tuple[int, int]] = []
        for term in terms:
            if term.string.n != n:
                raise ValueError(
                    f"term on {term.string.n} qubits in {n}-qubit Hamiltonian"
                )
            key = (term.string.x_mask, term.string.z_mask)
            if key not in merged:
                merged[key] = 0.0
                order.append(key)
            merged[key] += term.coeff
        kept = tuple(
            PauliTerm(PauliString(n, x, z), merged[x, z])
            for (x, z) in order
            if abs(merged[x, z]) > ZERO_DROP
        )
        return cls(n, kept)


def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Pauli group product: returns (phase, string) with phase in {±1, ±i}."""
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n}")
    cx = a.x_mask ^ b.x_mask
    cz = a.z_mask ^ b.z_mask
    # P(x,z) := i^{popcount(x&z)} X^x Z^z; commuting Z^az past X^bx flips sign
    # per overlapping bit.
    e = (
        (a.x_mask & a.z_mask).bit_count()
        + (b.x_mask & b.z_mask).bit_count()
        - (cx & cz).bit_count()
        + 2 * (a.z_mask & b.x_mask).bit_count()
    ) % 4
    return _PHASES[e], PauliString(a.n, cx, cz)


def anticommutes(a: PauliString, b: PauliString) -> bool:
    """True iff a and b anticommute (odd symplectic overlap)."""
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n}")
    overlap = (a.x_mask & b.z_mask).bit_count() + (a.z_mask & b.x_mask).bit_count()
    return overlap % 2 == 1


def commutator_norm(a: PauliTerm, b: PauliTerm) -> float:
    """Spectral norm of [w_a P_a, w_b P_b]: 2|w_a w_b| if anticommuting else 0."""
    if anticommutes(a.string, b.string):
        return 2.0 * abs(a.coeff * b.coeff)
    return 0.0


@dataclass(frozen=True)
class FreeFermionic:
    """Classification result: string = sign * (-i) * gamma_a * gamma_b."""

    pair: tuple[int, int]
    sign: int


def majorana_string(index: int, n: int) -> PauliString:
    """Majorana operator 2i -> Z..Z X_i, 2i+1 -> Z..Z Y_i as a Pauli string."""
    q, y_type = divmod(index, 2)
    if not 0 <= q < n:
        raise ValueError(f"Majorana index {index} out of range for n={n}")
    prefix = (1 << q) - 1
    x = 1 << q
    z = prefix | (x if y_type else 0)
    return PauliString(n, x, z)


def classify_term(t: PauliTerm) -> FreeFermionic | None:
    """Identify the quadratic-Majorana strings; None means residual.

    Free-fermionic strings are a single Z_i, or two endpoints from {X, Y} at
    qubits i < j with Z on every qubit strictly between and I elsewhere.  The
    returned pair (a, b) and sign satisfy the dense identity

        matrix(t.string) == sign * (-i) * matrix(gamma_a) * matrix(gamma_b)

    which the test suite verifies against the dense oracle.
    """
    p = t.string
    x, z = p.x_mask, p.z_mask
    if x == 0:
        if z != 0 and z & (z - 1) == 0:  # exactly one Z
            i = z.bit_length() - 1
            return FreeFermionic((2 * i, 2 * i + 1), 1)
        return None
    if x.bit_count() != 2:
        return None
    i = (x & -x).bit_length() - 1
    j = x.bit_length() - 1
    between = ((1 << j) - 1) & ~((1 << (i + 1)) - 1)
    # Z must fill the interior exactly; endpoints may carry Z (making them Y);
    # nothing outside [i, j].
    if z & ~(between | (1 << i) | (1 << j)) or (z & between) != between:
        return None
    y_at_i = bool(z & (1 << i))
    y_at_j = bool(z & (1 << j))
    a = 2 * i if y_at_i else 2 * i + 1
    b = 2 * j + 1 if y_at_j else 2 * j
    return FreeFermionic((a, b), -1 if y_at_i else 1)


def parse_hamiltonian(text: str) -> Hamiltonian:
    """Load the JSON Hamiltonian format (see README: file formats)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid Hamiltonian JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ValueError("Hamiltonian JSON must be an object")
    n = doc.get("n_qubits")
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"bad n_qubits: {n!r}")
    raw = doc.get("terms")
    if not isinstance(raw, list):
        raise ValueError("missing terms list")
    terms = []
    for idx, entry in enumerate(raw):
        try:
            pauli = entry["pauli"]
            coeff = entry["coeff"]
        except (TypeError, KeyError) as exc:
            raise ValueError(f"term {idx}: missing field {exc}") from None
        string = PauliString.from_text(pauli)
        if string.n != n:
            raise ValueError(f"term {idx}: length {string.n} != n_qubits {n}")
        if not isinstance(coeff, (int, float)) or not math.isfinite(coeff):
            raise ValueError(f"term {idx}: non-finite coefficient {coeff!r}")
        terms.append(PauliTerm(string, float(coeff)))
    return Hamiltonian.build(n, terms)


def render_hamiltonian(h: Hamiltonian) -> str:
    doc = {
        "n_qubits": h.n,
        "terms": [{"pauli": t.string.text(), "coeff": t.coeff} for t in h.terms],
    }
    return json.dumps(doc)
