"""Benchmark Hamiltonian families at configurable sizes.

These are synthetic stand-ins: the encodings (Jordan-Wigner with qubit
2j = site j spin-up, qubit 2j+1 = spin-down) are documented here and fixed,
but they are not anyone's exact published instances, so absolute gate counts
are not comparable across toolchains.

Fermionic models are assembled symbolically: creation/annihilation operators
become sums of Majorana strings and all products run through the Pauli
algebra, so every coefficient and Z-string is derived rather than hand-coded.
Constant (identity) terms are dropped as global phases.
"""

from __future__ import annotations

from .pauli import Hamiltonian, PauliString, PauliTerm, majorana_string, multiply

_IMAG_TOL = 1e-12

# operator = {(x_mask, z_mask): complex coefficient} on a fixed qubit count


def _op_add(a: dict, b: dict, scale: complex = 1.0) -> dict:
    out = dict(a)
    for key, coeff in b.items():
        out[key] = out.get(key, 0.0) + scale * coeff
    return out


def _op_mul(a: dict, b: dict, n: int) -> dict:
    out: dict = {}
    for (ax, az), ac in a.items():
        pa = PauliString(n, ax, az)
        for (bx, bz), bc in b.items():
            phase, prod = multiply(pa, PauliString(n, bx, bz))
            key = (prod.x_mask, prod.z_mask)
            out[key] = out.get(key, 0.0) + ac * bc * phase
    return out


def _majorana_op(index: int, n: int) -> dict:
    g = majorana_string(index, n)
    return {(g.x_mask, g.z_mask): 1.0}


def _annihilate(q: int, n: int) -> dict:
    # c_q = (gamma_{2q} + i gamma_{2q+1}) / 2
    return _op_add(
        {k: 0.5 * v for k, v in _majorana_op(2 * q, n).items()},
        _majorana_op(2 * q + 1, n),
        0.5j,
    )


def _create(q: int, n: int) -> dict:
    return _op_add(
        {k: 0.5 * v for k, v in _majorana_op(2 * q, n).items()},
        _majorana_op(2 * q + 1, n),
        -0.5j,
    )


def _number(q: int, n: int) -> dict:
    return _op_mul(_create(q, n), _annihilate(q, n), n)


def _to_hamiltonian(op: dict, n: int) -> Hamiltonian:
    terms = []
    for (xm, zm), coeff in op.items():
        if abs(coeff.imag) > _IMAG_TOL:
            raise AssertionError(f"non-Hermitian assembly: imag {coeff.imag:g}")
        if xm == 0 and zm == 0:
            continue  # constant offset, a global phase under evolution
        if abs(coeff.real) <= _IMAG_TOL:
            continue
        terms.append(PauliTerm(PauliString(n, xm, zm), coeff.real))
    return Hamiltonian.build(n, terms)


def _hop(p: int, q: int, amplitude: float, n: int) -> dict:
    """amplitude * (c_p^dag c_q + c_q^dag c_p)."""
    term = _op_add(
        _op_mul(_create(p, n), _annihilate(q, n), n),
        _op_mul(_create(q, n), _annihilate(p, n), n),
    )
    return {k: amplitude * v for k, v in term.items()}


def fermi_hubbard_1d(sites: int, t_hop: float = 1.0, u_int: float = 2.0) -> Hamiltonian:
    """Hopping plus particle-hole-symmetric onsite repulsion on 2*sites qubits.

    The onsite term uses U (n_up - 1/2)(n_down - 1/2), which reduces to pure
    ZZ couplings: the interaction is entirely residual and t_hop = 0 leaves
    no free part, u_int = 0 no residual part.
    """
    if sites < 2:
        raise ValueError("need at least 2 sites")
    n = 2 * sites
    op: dict = {}
    for j in range(sites - 1):
        for spin in (0, 1):
            op = _op_add(op, _hop(2 * j + spin, 2 * (j + 1) + spin, -t_hop, n))
    half = {(0, 0): -0.5}
    for j in range(sites):
        shifted_up = _op_add(_number(2 * j, n), half)
        shifted_dn = _op_add(_number(2 * j + 1, n), half)
        op = _op_add(op, _op_mul(shifted_up, shifted_dn, n), u_int)
    return _to_hamiltonian(op, n)


def _pauli_on(n: int, letters: dict[int, str]) -> PauliString:
    text = "".join(letters.get(q, "I") for q in range(n))
    return PauliString.from_text(text)


def _heisenberg_bonds(n: int, bonds, jx, jy, jz) -> Hamiltonian:
    terms = []
    for i, j in bonds:
        for coupling, letter in ((jx, "X"), (jy, "Y"), (jz, "Z")):
            if coupling != 0.0:
                terms.append(PauliTerm(_pauli_on(n, {i: letter, j: letter}), coupling))
    return Hamiltonian.build(n, terms)


def heisenberg_1d(sites: int, jx: float = 1.0, jy: float = 1.0, jz: float = 1.0) -> Hamiltonian:
    """Nearest-neighbor XX/YY/ZZ chain; XX and YY bonds are free, ZZ residual."""
    if sites < 2:
        raise ValueError("need at least 2 sites")
    return _heisenberg_bonds(sites, [(i, i + 1) for i in range(sites - 1)], jx, jy, jz)


def heisenberg_2d(
    rows: int, cols: int, jx: float = 1.0, jy: float = 1.0, jz: float = 1.0
) -> Hamiltonian:
    """Grid couplings, qubit index r*cols + c.

    Only horizontal bonds are adjacent in the Jordan-Wigner line; vertical
    XX/YY bonds lack the Z string and classify residual, matching the physics
    (the 2D XY model is not free-fermionic under a 1D JW ordering).
    """
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError("grid too small")
    bonds = []
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                bonds.append((q, q + 1))
            if r + 1 < rows:
                bonds.append((q, q + cols))
    return _heisenberg_bonds(rows * cols, bonds, jx, jy, jz)


def tj_1d(sites: int, t_hop: float = 1.0, j_ex: float = 0.4) -> Hamiltonian:
    """t-J chain: hopping plus J (S_i . S_j - n_i n_j / 4) under JW."""
    if sites < 2:
        raise ValueError("need at least 2 sites")
    n = 2 * sites
    op: dict = {}
    for j in range(sites - 1):
        for spin in (0, 1):
            op = _op_add(op, _hop(2 * j + spin, 2 * (j + 1) + spin, -t_hop, n))

    def spin_ops(site):
        up, dn = 2 * site, 2 * site + 1
        sz = _op_add(_number(up, n), _number(dn, n), -1.0)
        sz = {k: 0.5 * v for k, v in sz.items()}
        splus = _op_mul(_create(up, n), _annihilate(dn, n), n)
        sminus = _op_mul(_create(dn, n), _annihilate(up, n), n)
        dens = _op_add(_number(up, n), _number(dn, n))
        return sz, splus, sminus, dens

    for j in range(sites - 1):
        sz1, sp1, sm1, n1 = spin_ops(j)
        sz2, sp2, sm2, n2 = spin_ops(j + 1)
        exchange = _op_mul(sz1, sz2, n)
        exchange = _op_add(exchange, _op_mul(sp1, sm2, n), 0.5)
        exchange = _op_add(exchange, _op_mul(sm1, sp2, n), 0.5)
        exchange = _op_add(exchange, _op_mul(n1, n2, n), -0.25)
        op = _op_add(op, exchange, j_ex)
    return _to_hamiltonian(op, n)
