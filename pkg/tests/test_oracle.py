import numpy as np
import pytest

from f2c import oracle
from f2c.circuit import CircuitIR, cx, h, rz
from f2c.pauli import Hamiltonian, PauliString, PauliTerm


def test_pauli_matrix_x():
    assert np.array_equal(
        oracle.pauli_matrix(PauliString.from_text("X")), [[0, 1], [1, 0]]
    )


def test_pauli_matrix_zi_leftmost():
    m = oracle.pauli_matrix(PauliString.from_text("ZI"))
    assert np.array_equal(np.diag(m).real, [1, 1, -1, -1])


def test_all_two_qubit_strings_hermitian_unitary():
    for x in range(4):
        for z in range(4):
            m = oracle.pauli_matrix(PauliString(2, x, z))
            assert np.allclose(m, m.conj().T)
            assert np.allclose(m @ m.conj().T, np.eye(4))


def test_size_cap():
    with pytest.raises(ValueError):
        oracle.pauli_matrix(PauliString.identity(11))


def test_expm_single_z():
    hm = Hamiltonian.build(1, [PauliTerm(PauliString.from_text("Z"), 1.0)])
    u = oracle.expm_hermitian(hm, np.pi)
    assert np.allclose(u, np.diag([np.exp(-1j * np.pi), np.exp(1j * np.pi)]))


def test_expm_commuting_terms_factorize():
    za = PauliTerm(PauliString.from_text("ZI"), 0.7)
    zb = PauliTerm(PauliString.from_text("IZ"), -0.4)
    joint = oracle.expm_hermitian(Hamiltonian.build(2, [za, zb]), 0.3)
    ua = oracle.expm_hermitian(Hamiltonian.build(2, [za]), 0.3)
    ub = oracle.expm_hermitian(Hamiltonian.build(2, [zb]), 0.3)
    assert np.abs(joint - ua @ ub).max() < 1e-12


def test_trotter_product_error_within_bound():
    # anticommuting pair: first-order product formula error vs the bound
    terms = [
        PauliTerm(PauliString.from_text("X"), 1.0),
        PauliTerm(PauliString.from_text("Z"), 1.0),
    ]
    hm = Hamiltonian.build(1, terms)
    t, steps = 0.1, 100
    exact = oracle.expm_hermitian(hm, t)
    factor = np.eye(2, dtype=complex)
    for term in terms:
        factor = factor @ oracle.expm_hermitian(
            Hamiltonian.build(1, [term]), t / steps
        )
    approx = np.linalg.matrix_power(factor, steps)
    err = np.linalg.norm(exact - approx, 2)
    bound = t * t / (2 * steps) * 2.0  # commutator norm of [X, Z] is 2
    assert err <= bound + 1e-9


def test_circuit_unitary_trivials():
    assert np.allclose(oracle.circuit_unitary(CircuitIR(2, ())), np.eye(4))
    hh = CircuitIR(1, (h(0), h(0)))
    assert np.allclose(oracle.circuit_unitary(hh), np.eye(2), atol=1e-12)


def test_circuit_unitary_execution_order():
    # rz after h means U = RZ @ H
    c = CircuitIR(1, (h(0), rz(0, 0.7)))
    expect = np.diag([np.exp(-0.35j), np.exp(0.35j)]) @ (
        np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    )
    assert np.abs(oracle.circuit_unitary(c) - expect).max() < 1e-12


def test_circuit_unitary_cx_positions():
    # control on qubit 1, target qubit 0; qubit 0 is the most significant bit,
    # so |q0 q1>: 00->00, 01->11, 10->10, 11->01
    c = CircuitIR(2, (cx(1, 0),))
    u = oracle.circuit_unitary(c)
    expect = np.zeros((4, 4))
    expect[0b00, 0b00] = 1
    expect[0b11, 0b01] = 1
    expect[0b10, 0b10] = 1
    expect[0b01, 0b11] = 1
    assert np.array_equal(u.real, expect)


def test_trace_fidelity_properties(rng):
    q, _ = np.linalg.qr(
        rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    )
    assert oracle.trace_fidelity(q, q) == pytest.approx(1.0)
    assert oracle.trace_fidelity(q, np.exp(0.3j) * q) == pytest.approx(1.0)
    x1 = oracle.pauli_matrix(PauliString.from_text("X"))
    assert oracle.trace_fidelity(np.eye(2, dtype=complex), x1) == 0.0


def test_majorana_conjugation_of_identity():
    r = oracle.majorana_conjugation(np.eye(4, dtype=complex), 2)
    assert np.allclose(r, np.eye(4))
