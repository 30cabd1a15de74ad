"""Lowering of simulator circuits to the native set {X2P, X2M, Y2P, Y2M, RZ, CZ}.

A NativeCircuit ``nc`` represents the unitary ``exp(i nc.global_phase) * U_gates``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliTerm
from .sim import (
    SINGLE_QUBIT,
    Gate,
    GateKind,
    circuit_unitary,
    cnot,
    h,
    rotation_matrix,
    rx,
    rz,
    single_qubit_matrix,
)

NATIVE_KINDS = ("X2P", "X2M", "Y2P", "Y2M", "RZ", "CZ")
SCHEMA_VERSION = 1
ANGLE_TOL = 1e-12
_EQ_TOL = 1e-10


class UnsupportedGateError(ValueError):
    pass


@dataclass(frozen=True)
class NativeGate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in NATIVE_KINDS:
            raise ValueError(f"{self.kind} is not native")
        if (self.kind == "RZ") != (self.angle is not None):
            raise ValueError("only RZ carries an angle")

    def matrix(self) -> np.ndarray:
        if self.kind == "RZ":
            return rotation_matrix(GateKind.RZ, self.angle)
        if self.kind == "CZ":
            return np.diag([1, 1, 1, -1]).astype(complex)
        axis = GateKind.RX if self.kind[0] == "X" else GateKind.RY
        return rotation_matrix(axis, math.pi / 2 if self.kind.endswith("P") else -math.pi / 2)

    def to_sim(self) -> Gate:
        if self.kind == "CZ":
            return Gate(GateKind.CZ, self.qubits)
        if self.kind == "RZ":
            return rz(self.qubits[0], self.angle)
        axis = GateKind.RX if self.kind[0] == "X" else GateKind.RY
        sign = 1 if self.kind.endswith("P") else -1
        return Gate(axis, self.qubits, sign * math.pi / 2)


@dataclass(frozen=True)
class NativeCircuit:
    n_qubits: int
    gates: tuple[NativeGate, ...] = ()
    global_phase: float = 0.0

    def __len__(self):
        return len(self.gates)

    def to_sim(self) -> list[Gate]:
        return [g.to_sim() for g in self.gates]

    def unitary(self) -> np.ndarray:
        return np.exp(1j * self.global_phase) * circuit_unitary(self.to_sim(), self.n_qubits)


def _wrap_phase(phi: float) -> float:
    return math.remainder(phi, 2 * math.pi)


def _same_up_to_phase(u: np.ndarray, v: np.ndarray) -> float | None:
    i = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    ph = np.angle(u[i] / v[i])
    if np.max(np.abs(u - np.exp(1j * ph) * v)) <= _EQ_TOL:
        return float(ph)
    return None


def _phase_of(u: np.ndarray, natives: Sequence[NativeGate]) -> float:
    v = np.eye(2, dtype=complex)
    for g in natives:
        v = g.matrix() @ v
    ph = _same_up_to_phase(u, v)
    if ph is None:
        raise AssertionError("single-qubit synthesis failed")
    return ph


def _rz(q: int, theta: float) -> list[NativeGate]:
    theta = math.remainder(theta, 4 * math.pi)
    return [] if abs(theta) <= ANGLE_TOL else [NativeGate("RZ", (q,), theta)]


def _fixed_sequences(q: int) -> dict[str, list[NativeGate]]:
    return {
        "X2P": [NativeGate("X2P", (q,))],
        "X2M": [NativeGate("X2M", (q,))],
        "Y2P": [NativeGate("Y2P", (q,))],
        "Y2M": [NativeGate("Y2M", (q,))],
        "H": [NativeGate("Y2M", (q,)), NativeGate("RZ", (q,), math.pi)],
        "X": [NativeGate("X2P", (q,)), NativeGate("X2P", (q,))],
        "Y": [NativeGate("Y2P", (q,)), NativeGate("Y2P", (q,))],
    }


def synthesize_1q(u: np.ndarray, q: int) -> tuple[list[NativeGate], float]:
    """Native sequence and global phase for a 2x2 unitary ``u``.

    Diagonal unitaries become a single RZ and quarter-turn X/Y rotations map
    to their native pulse. Otherwise u = e^{ia} Rz(alpha) Ry(beta) Rz(gamma),
    with Ry(beta) realized as Y2P/Y2M when beta = +-pi/2 and as
    X2P Rz(beta - pi) X2P followed by Rz(pi) in general.
    """
    u = np.asarray(u, dtype=complex)
    if abs(u[0, 1]) <= _EQ_TOL and abs(u[1, 0]) <= _EQ_TOL:
        seq = _rz(q, float(np.angle(u[1, 1]) - np.angle(u[0, 0])))
        return merge_rz(seq, _phase_of(u, seq))
    for seq in _fixed_sequences(q).values():
        ph = _phase_of_or_none(u, seq)
        if ph is not None:
            return seq, ph
    v = u / np.sqrt(np.linalg.det(u))
    beta = 2 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[0, 0]) <= _EQ_TOL:
        alpha, gamma = 2 * float(np.angle(v[1, 0])), 0.0
    else:
        s = 2 * float(np.angle(v[1, 1]))
        d = 2 * float(np.angle(v[1, 0]))
        alpha, gamma = (s + d) / 2, (s - d) / 2
    if abs(beta - math.pi / 2) <= ANGLE_TOL:
        middle = [NativeGate("Y2P", (q,))]
        post = alpha
    else:
        middle = [NativeGate("X2P", (q,)), *_rz(q, beta - math.pi), NativeGate("X2P", (q,))]
        post = alpha + math.pi
    seq = [*_rz(q, gamma), *middle, *_rz(q, post)]
    return merge_rz(seq, _phase_of(u, seq))


def _phase_of_or_none(u, seq) -> float | None:
    v = np.eye(2, dtype=complex)
    for g in seq:
        v = g.matrix() @ v
    return _same_up_to_phase(u, v)


def decompose_1q(g: Gate) -> tuple[list[NativeGate], float]:
    if g.kind not in SINGLE_QUBIT:
        raise UnsupportedGateError(f"{g.kind.value} is not a single-qubit gate")
    q = g.targets[0]
    if g.kind is GateKind.RZ:
        return merge_rz([NativeGate("RZ", (q,), g.angle)])
    return synthesize_1q(single_qubit_matrix(g), q)


def lower_pauli_exp(p: PauliTerm, theta: float) -> list[Gate]:
    """exp(-i P theta/2) as basis changes, a CNOT parity ladder and one RZ."""
    support = [q for q in range(p.n_qubits) if (p.x_mask | p.z_mask) >> q & 1]
    if not support:
        return []
    pre, post = [], []
    for q in support:
        x, z = p.x_mask >> q & 1, p.z_mask >> q & 1
        if x and z:
            # Rx(pi/2) Y Rx(-pi/2) = Z
            pre.append(rx(q, math.pi / 2))
            post.append(rx(q, -math.pi / 2))
        elif x:
            pre.append(h(q))
            post.append(h(q))
    ladder = [cnot(a, b) for a, b in zip(support, support[1:])]
    sign = 1 if p.weight.real > 0 else -1
    core = [*ladder, rz(support[-1], sign * theta), *reversed(ladder)]
    return [*pre, *core, *post]


def merge_rz(gates: Iterable[NativeGate], phase: float = 0.0) -> tuple[list[NativeGate], float]:
    """Fuse runs of RZ on each qubit, normalizing angles into (-pi, pi].

    Rz(theta + 2 pi) = -Rz(theta), so each wrap adds pi to the phase.
    """
    out: list[NativeGate] = []
    pending: dict[int, float] = {}

    def flush(q: int):
        nonlocal phase
        if q not in pending:
            return
        theta = pending.pop(q)
        wrapped = math.remainder(theta, 2 * math.pi)
        turns = round((theta - wrapped) / (2 * math.pi))
        if wrapped == -math.pi:
            wrapped = math.pi
            turns -= 1
        if turns % 2:
            phase += math.pi
        if abs(wrapped) > ANGLE_TOL:
            out.append(NativeGate("RZ", (q,), wrapped))

    for g in gates:
        if g.kind == "RZ":
            q = g.qubits[0]
            pending[q] = pending.get(q, 0.0) + g.angle
            continue
        for q in g.qubits:
            flush(q)
        out.append(g)
    for q in sorted(pending):
        flush(q)
    return out, _wrap_phase(phase)


def _infer_qubits(gates: Sequence) -> int:
    n = 0
    for g in gates:
        qs = g.qubits if isinstance(g, NativeGate) else g.qubits()
        n = max([n, *(q + 1 for q in qs)])
    return max(n, 1)


def transpile(circuit: Sequence[Gate] | NativeCircuit, n_qubits: int | None = None) -> NativeCircuit:
    if isinstance(circuit, NativeCircuit):
        gates, phase = merge_rz(circuit.gates, circuit.global_phase)
        return NativeCircuit(circuit.n_qubits, tuple(gates), phase)
    circuit = list(circuit)
    n = _infer_qubits(circuit) if n_qubits is None else n_qubits
    natives: list[NativeGate] = []
    phase = 0.0
    stack = list(reversed(circuit))
    while stack:
        g = stack.pop()
        if g.kind in SINGLE_QUBIT:
            seq, ph = decompose_1q(g)
            natives += seq
            phase += ph
        elif g.kind is GateKind.CZ:
            natives.append(NativeGate("CZ", tuple(g.targets)))
        elif g.kind is GateKind.CNOT:
            t = g.targets[0]
            natives += [NativeGate("Y2M", (t,)), NativeGate("CZ", (g.control, t)), NativeGate("Y2P", (t,))]
        elif g.kind is GateKind.PAULI_EXP:
            stack.extend(reversed(lower_pauli_exp(g.pauli, g.angle)))
        else:
            raise UnsupportedGateError(f"{g.kind.value} must be lowered before transpilation")
    gates, phase = merge_rz(natives, phase)
    return NativeCircuit(n, tuple(gates), phase)


@dataclass(frozen=True)
class Equivalence:
    ok: bool
    deviation: float
    phase: float


def _unitary(c, n: int | None) -> np.ndarray:
    if isinstance(c, NativeCircuit):
        return c.unitary()
    c = list(c)
    return circuit_unitary(c, _infer_qubits(c) if n is None else n)


def verify_equivalence(a, b, tol: float = 1e-9, n_qubits: int | None = None) -> Equivalence:
    """Check U_a = e^{i phi} U_b for the phase read off the largest entry of U_b."""
    ua, ub = _unitary(a, n_qubits), _unitary(b, n_qubits)
    if ua.shape != ub.shape:
        raise ValueError(f"dimension mismatch: {ua.shape} vs {ub.shape}")
    i = np.unravel_index(np.argmax(np.abs(ub)), ub.shape)
    ph = float(np.angle(ua[i] / ub[i]))
    dev = float(np.max(np.abs(ua - np.exp(1j * ph) * ub)))
    return Equivalence(dev <= tol, dev, ph)


# --- serialization ----------------------------------------------------------


def native_jsonl(nc: NativeCircuit) -> str:
    lines = [json.dumps({"schema_version": SCHEMA_VERSION, "n_qubits": nc.n_qubits, "global_phase": nc.global_phase})]
    for g in nc.gates:
        rec = {"kind": g.kind, "qubits": list(g.qubits)}
        if g.angle is not None:
            rec["angle"] = g.angle
        lines.append(json.dumps(rec))
    return "\n".join(lines) + "\n"


def parse_native_jsonl(text: str) -> NativeCircuit:
    lines = [json.loads(s) for s in text.splitlines() if s.strip()]
    head, body = lines[0], lines[1:]
    gates = tuple(NativeGate(r["kind"], tuple(r["qubits"]), r.get("angle")) for r in body)
    return NativeCircuit(head["n_qubits"], gates, head["global_phase"])


def gate_to_dict(g: Gate) -> dict:
    rec: dict = {"kind": g.kind.value}
    if g.kind is GateKind.CNOT:
        rec["qubits"] = [g.control, g.targets[0]]
    elif g.targets:
        rec["qubits"] = list(g.targets)
    if g.pauli is not None:
        rec["pauli"] = g.pauli.label
    if g.control is not None and g.kind is not GateKind.CNOT:
        rec["control"] = g.control
    if g.angle is not None:
        rec["angle"] = g.angle
    return rec


def gate_from_dict(rec: dict) -> Gate:
    try:
        kind = GateKind(rec["kind"].upper())
    except ValueError:
        raise UnsupportedGateError(f"unknown gate kind {rec['kind']!r}") from None
    qubits = tuple(rec.get("qubits", ()))
    if kind is GateKind.CNOT:
        return cnot(qubits[0], qubits[1])
    pauli = PauliTerm.from_label(rec["pauli"]) if "pauli" in rec else None
    angle = float(rec["angle"]) if "angle" in rec else None
    return Gate(kind, qubits, angle, pauli, rec.get("control"))


def circuit_to_json(gates: Sequence[Gate], n_qubits: int) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "n_qubits": n_qubits, "gates": [gate_to_dict(g) for g in gates]}
    return json.dumps(doc, indent=2)


def circuit_from_json(text: str) -> tuple[list[Gate], int]:
    doc = json.loads(text)
    gates = [gate_from_dict(r) for r in doc["gates"]]
    return gates, int(doc.get("n_qubits", _infer_qubits(gates)))
