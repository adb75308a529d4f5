"""Native-gate circuit IR: lowering, peephole cleanup, metrics, OpenQASM 3.

Gate list order is execution order, so unitary(concat(c1, c2)) equals
unitary(c2) @ unitary(c1).  RZ follows the exp(-i theta/2 Z) convention; the
rotation constants in both lowerings are pinned by dense-oracle equivalence
tests.  Global phase is ignored throughout (all fidelity checks are
|Tr|-based).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .env import Action

GATE_KINDS = ("CX", "RZ", "H", "S", "SDG", "X")
_TWO_PI = 2 * math.pi
_ZERO_ANGLE = 1e-12


def _reduce_angle(theta: float) -> float:
    """Map into (-2pi, 2pi] preserving the RZ matrix up to global phase sign."""
    if not math.isfinite(theta):
        raise ValueError(f"non-finite angle {theta!r}")
    reduced = math.remainder(theta, 2 * _TWO_PI)
    if reduced <= -_TWO_PI:
        reduced += 2 * _TWO_PI
    return reduced


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    param: float | None = None


def cx(control: int, target: int) -> Gate:
    if control == target:
        raise ValueError("CX control and target must differ")
    return Gate("CX", (control, target))


def rz(q: int, theta: float) -> Gate:
    return Gate("RZ", (q,), _reduce_angle(theta))


def h(q: int) -> Gate:
    return Gate("H", (q,))


def s(q: int) -> Gate:
    return Gate("S", (q,))


def sdg(q: int) -> Gate:
    return Gate("SDG", (q,))


def x(q: int) -> Gate:
    return Gate("X", (q,))


@dataclass(frozen=True)
class CircuitIR:
    n: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        for g in self.gates:
            if any(q < 0 or q >= self.n for q in g.qubits):
                raise ValueError(f"gate {g} out of range for n={self.n}")


def concat(*circuits: CircuitIR) -> CircuitIR:
    n = circuits[0].n
    if any(c.n != n for c in circuits):
        raise ValueError("mixed qubit counts")
    gates: tuple[Gate, ...] = ()
    for c in circuits:
        gates += c.gates
    return CircuitIR(n, gates)


def replicate(c: CircuitIR, times: int) -> CircuitIR:
    return CircuitIR(c.n, c.gates * times)


def gate_count(c: CircuitIR) -> int:
    return len(c.gates)


def two_qubit_count(c: CircuitIR) -> int:
    return sum(1 for g in c.gates if len(g.qubits) == 2)


def depth(c: CircuitIR) -> int:
    """Greedy ASAP layering; every gate occupies one layer on each qubit."""
    level = [0] * c.n
    out = 0
    for g in c.gates:
        layer = 1 + max(level[q] for q in g.qubits)
        for q in g.qubits:
            level[q] = layer
        out = max(out, layer)
    return out


# single-qubit basis change bringing the letter's axis onto Z:
# circuit order (applied first .. last); post gates are the inverse.
def _basis_change(letter: str, q: int) -> tuple[list[Gate], list[Gate]]:
    if letter == "Z":
        return [], []
    if letter == "X":
        return [h(q)], [h(q)]
    if letter == "Y":
        return [sdg(q), h(q)], [h(q), s(q)]
    raise ValueError(f"cannot rotate identity letter on qubit {q}")


def lower_action(a: Action, n: int) -> CircuitIR:
    """Native-gate fragment for exp(-i theta/2 P_kind(site)), theta = a.angle."""
    theta = a.angle
    if a.kind == "Z":
        return CircuitIR(n, (rz(a.site, theta),))
    i, j = a.site, a.site + 1
    pre_i, post_i = _basis_change(a.kind[0], i)
    pre_j, post_j = _basis_change(a.kind[1], j)
    gates = (
        pre_i + pre_j + [cx(i, j), rz(j, theta), cx(i, j)] + post_j + post_i
    )
    return CircuitIR(n, tuple(gates))


def lower_pauli_exponential(term, dt: float) -> CircuitIR:
    """Ladder circuit for exp(-i coeff dt P): fan-in CX onto the last active qubit."""
    p = term.string
    active = [q for q in range(p.n) if p.letter(q) != "I"]
    if not active:
        raise ValueError("cannot exponentiate the identity string")
    pre: list[Gate] = []
    post: list[Gate] = []
    for q in active:
        pq, sq = _basis_change(p.letter(q), q)
        pre += pq
        post = sq + post
    last = active[-1]
    chain = [cx(q, last) for q in active[:-1]]
    body = chain + [rz(last, 2.0 * term.coeff * dt)] + chain[::-1]
    return CircuitIR(p.n, tuple(pre + body + post))


_CANCEL_PAIRS = {("H", "H"), ("X", "X"), ("S", "SDG"), ("SDG", "S"), ("CX", "CX")}


def peephole(c: CircuitIR) -> CircuitIR:
    """Fixpoint of RZ merging, zero-RZ deletion and self-inverse cancellation.

    Two gates interact only when strictly adjacent on every wire they touch.
    Single forward pass with rollback: removing a pair re-exposes earlier
    gates, so cascading cancellations resolve in O(gates).
    """
    out: list[Gate | None] = []
    prev_on_wire: list[dict[int, int]] = []  # per kept gate: qubit -> prior index
    top: dict[int, int] = {}

    def push(g: Gate):
        idx = len(out)
        out.append(g)
        prev_on_wire.append({q: top.get(q, -1) for q in g.qubits})
        for q in g.qubits:
            top[q] = idx

    def pop(idx: int):
        for q in out[idx].qubits:
            top_q = prev_on_wire[idx][q]
            if top_q >= 0:
                top[q] = top_q
            else:
                top.pop(q, None)
        out[idx] = None

    for g in c.gates:
        if g.kind == "RZ" and abs(math.remainder(g.param, _TWO_PI)) < _ZERO_ANGLE:
            continue
        idx = top.get(g.qubits[0], -1)
        prior = out[idx] if idx >= 0 else None
        # the pair must be adjacent on all wires of both gates
        aligned = (
            prior is not None
            and prior.qubits == g.qubits
            and all(top.get(q, -1) == idx for q in g.qubits)
        )
        if aligned and (prior.kind, g.kind) in _CANCEL_PAIRS:
            pop(idx)
            continue
        if aligned and prior.kind == "RZ" and g.kind == "RZ":
            merged = math.remainder(prior.param + g.param, _TWO_PI)
            pop(idx)
            if abs(merged) > _ZERO_ANGLE:
                push(rz(g.qubits[0], merged))
            continue
        push(g)
    return CircuitIR(c.n, tuple(g for g in out if g is not None))


# ------------------------------------------------------------------ OpenQASM

_QASM_HEADER = 'OPENQASM 3;\ninclude "stdgates.inc";\n'


def emit_qasm(c: CircuitIR) -> str:
    lines = [_QASM_HEADER + f"qubit[{c.n}] q;"]
    for g in c.gates:
        if g.kind == "CX":
            lines.append(f"cx q[{g.qubits[0]}], q[{g.qubits[1]}];")
        elif g.kind == "RZ":
            lines.append(f"rz({g.param:.15g}) q[{g.qubits[0]}];")
        else:
            lines.append(f"{g.kind.lower()} q[{g.qubits[0]}];")
    return "\n".join(lines) + "\n"


_GATE_RE = re.compile(
    r"^(?P<name>[a-z]+)\s*(?:\((?P<param>[^)]+)\))?\s+"
    r"q\[(?P<a>\d+)\]\s*(?:,\s*q\[(?P<b>\d+)\])?;$"
)


def parse_qasm(text: str) -> CircuitIR:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3 or lines[0] != "OPENQASM 3;" or not lines[1].startswith("include"):
        raise ValueError("missing OpenQASM 3 header")
    decl = re.match(r"^qubit\[(\d+)\] q;$", lines[2])
    if not decl:
        raise ValueError(f"bad qubit declaration: {lines[2]!r}")
    n = int(decl.group(1))
    gates = []
    for lineno, line in enumerate(lines[3:], start=4):
        m = _GATE_RE.match(line)
        if not m:
            raise ValueError(f"line {lineno}: cannot parse {line!r}")
        name = m.group("name")
        a = int(m.group("a"))
        if name == "cx":
            if m.group("b") is None:
                raise ValueError(f"line {lineno}: cx needs two qubits")
            gates.append(cx(a, int(m.group("b"))))
        elif name == "rz":
            gates.append(rz(a, float(m.group("param"))))
        elif name in ("h", "s", "sdg", "x"):
            gates.append(Gate(name.upper(), (a,)))
        else:
            raise ValueError(f"line {lineno}: unsupported gate {name!r}")
    return CircuitIR(n, tuple(gates))
