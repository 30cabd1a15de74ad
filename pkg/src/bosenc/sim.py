"""Dense statevector simulator with Pauli exponentials and Hadamard tests.

Qubit q is bit q of the amplitude index. Hadamard-test circuits put the
ancilla on qubit n (the highest), so system indexing is unchanged.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from .pauli import PauliSum, PauliTerm


class GateKind(str, enum.Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    H = "H"
    X = "X"
    Y = "Y"
    Z = "Z"
    CZ = "CZ"
    CNOT = "CNOT"
    PAULI_EXP = "PAULI_EXP"
    CONTROLLED_PAULI = "CONTROLLED_PAULI"
    ANTI_CONTROLLED_PAULI = "ANTI_CONTROLLED_PAULI"


ROTATIONS = {GateKind.RX, GateKind.RY, GateKind.RZ}
SINGLE_QUBIT = ROTATIONS | {GateKind.H, GateKind.X, GateKind.Y, GateKind.Z}


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    targets: tuple[int, ...] = ()
    angle: float | None = None
    pauli: PauliTerm | None = None
    control: int | None = None

    def qubits(self) -> tuple[int, ...]:
        qs = list(self.targets)
        if self.pauli is not None:
            qs += [q for q in range(self.pauli.n_qubits) if (self.pauli.x_mask | self.pauli.z_mask) >> q & 1]
        if self.control is not None:
            qs.append(self.control)
        return tuple(qs)


def rx(q: int, theta: float) -> Gate:
    return Gate(GateKind.RX, (q,), float(theta))


def ry(q: int, theta: float) -> Gate:
    return Gate(GateKind.RY, (q,), float(theta))


def rz(q: int, theta: float) -> Gate:
    return Gate(GateKind.RZ, (q,), float(theta))


def h(q: int) -> Gate:
    return Gate(GateKind.H, (q,))


def x(q: int) -> Gate:
    return Gate(GateKind.X, (q,))


def y(q: int) -> Gate:
    return Gate(GateKind.Y, (q,))


def z(q: int) -> Gate:
    return Gate(GateKind.Z, (q,))


def cz(a: int, b: int) -> Gate:
    return Gate(GateKind.CZ, (a, b))


def cnot(control: int, target: int) -> Gate:
    return Gate(GateKind.CNOT, (target,), control=control)


def pauli_exp(p: PauliTerm, theta: float) -> Gate:
    """exp(-i P theta / 2) for a Hermitian unit Pauli string P."""
    return Gate(GateKind.PAULI_EXP, angle=float(theta), pauli=_unit(p))


def controlled_pauli(control: int, p: PauliTerm) -> Gate:
    return Gate(GateKind.CONTROLLED_PAULI, pauli=_unit(p), control=control)


def anti_controlled_pauli(control: int, p: PauliTerm) -> Gate:
    return Gate(GateKind.ANTI_CONTROLLED_PAULI, pauli=_unit(p), control=control)


def _unit(p: PauliTerm) -> PauliTerm:
    w = p.weight
    if abs(abs(w) - 1) > 1e-12 or abs(w.imag) > 1e-12:
        raise ValueError(f"expected a unit Hermitian Pauli string, got weight {w}")
    return p


_C = 1 / math.sqrt(2)
FIXED_1Q = {
    GateKind.H: np.array([[_C, _C], [_C, -_C]], dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}


def rotation_matrix(kind: GateKind, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if kind is GateKind.RX:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind is GateKind.RY:
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind is GateKind.RZ:
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]])
    raise ValueError(f"{kind} is not a rotation")


def single_qubit_matrix(g: Gate) -> np.ndarray:
    if g.kind in ROTATIONS:
        return rotation_matrix(g.kind, g.angle)
    if g.kind in FIXED_1Q:
        return FIXED_1Q[g.kind]
    raise ValueError(f"{g.kind} is not a single-qubit gate")


@dataclass(frozen=True)
class Statevector:
    amps: np.ndarray

    @property
    def n_qubits(self) -> int:
        return self.amps.shape[0].bit_length() - 1

    @classmethod
    def zero(cls, n: int) -> Statevector:
        return cls.basis(n, 0)

    @classmethod
    def basis(cls, n: int, index: int) -> Statevector:
        amps = np.zeros(1 << n, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


def _as_amps(psi) -> np.ndarray:
    return psi.amps if isinstance(psi, Statevector) else np.asarray(psi, dtype=complex)


def _parity(indices: np.ndarray, mask: int) -> np.ndarray:
    return (np.bitwise_count(indices & mask) & 1).astype(np.int64)


def apply_pauli(amps: np.ndarray, p: PauliTerm) -> np.ndarray:
    """P |psi> for a Pauli term acting on the low ``p.n_qubits`` qubits."""
    idx = np.arange(amps.shape[0])
    out = np.empty_like(amps)
    signs = 1 - 2 * _parity(idx, p.z_mask)
    out[idx ^ p.x_mask] = p.coeff * signs * amps
    return out


def _apply_1q(amps: np.ndarray, mat: np.ndarray, q: int, n: int) -> np.ndarray:
    psi = amps.reshape(1 << (n - 1 - q), 2, 1 << q)
    return np.einsum("ab,ibj->iaj", mat, psi).reshape(-1)


def apply_gate(amps: np.ndarray, g: Gate, n: int) -> np.ndarray:
    for q in g.qubits():
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
    kind = g.kind
    if kind in SINGLE_QUBIT:
        return _apply_1q(amps, single_qubit_matrix(g), g.targets[0], n)
    idx = np.arange(amps.shape[0])
    if kind is GateKind.CZ:
        a, b = g.targets
        both = ((idx >> a) & 1) & ((idx >> b) & 1)
        return amps * (1 - 2 * both)
    if kind is GateKind.CNOT:
        t = g.targets[0]
        on = ((idx >> g.control) & 1).astype(bool)
        out = amps.copy()
        out[on] = amps[idx[on] ^ (1 << t)]
        return out
    if kind is GateKind.PAULI_EXP:
        half = g.angle / 2
        return math.cos(half) * amps - 1j * math.sin(half) * apply_pauli(amps, g.pauli)
    if kind in (GateKind.CONTROLLED_PAULI, GateKind.ANTI_CONTROLLED_PAULI):
        on = ((idx >> g.control) & 1).astype(bool)
        if kind is GateKind.ANTI_CONTROLLED_PAULI:
            on = ~on
        return np.where(on, apply_pauli(amps, g.pauli), amps)
    raise ValueError(f"unsupported gate {kind}")


def run(circuit: Iterable[Gate], psi0: Statevector | np.ndarray) -> Statevector:
    amps = _as_amps(psi0).copy()
    n = amps.shape[0].bit_length() - 1
    for g in circuit:
        amps = apply_gate(amps, g, n)
    return Statevector(amps)


def circuit_unitary(circuit: Sequence[Gate], n: int) -> np.ndarray:
    size = 1 << n
    cols = [run(circuit, Statevector.basis(n, j)).amps for j in range(size)]
    return np.stack(cols, axis=1)


def expectation(obs: PauliSum | PauliTerm, psi: Statevector | np.ndarray) -> complex:
    amps = _as_amps(psi)
    terms = obs.terms if isinstance(obs, PauliSum) else (obs,)
    n = amps.shape[0].bit_length() - 1
    if terms and terms[0].n_qubits != n:
        raise ValueError("observable and state qubit counts differ")
    return complex(sum(np.vdot(amps, apply_pauli(amps, t)) for t in terms))


# --- measurement --------------------------------------------------------------


@dataclass(frozen=True)
class ShotResult:
    basis: str
    counts: Mapping[str, int]
    shots: int
    seed: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")


def basis_rotation(basis: str) -> list[Gate]:
    """Gates taking each qubit's measured Pauli eigenbasis to Z (label reads qubit n-1 first)."""
    n = len(basis)
    gates = []
    for pos, ch in enumerate(basis.upper()):
        q = n - 1 - pos
        if ch == "X":
            gates.append(h(q))
        elif ch == "Y":
            # Rx(pi/2)^dag Z Rx(pi/2) = Y
            gates.append(rx(q, math.pi / 2))
        elif ch not in "ZI":
            raise ValueError(f"bad basis symbol {ch!r}")
    return gates


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def draw_indices(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF sampling of basis indices."""
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    return np.minimum(idx, probs.shape[0] - 1)


def sample(
    psi: Statevector | np.ndarray,
    basis: str,
    shots: int,
    seed: int,
    depolarizing: float = 0.0,
) -> ShotResult:
    if shots < 1:
        raise ValueError("shots must be positive")
    amps = _as_amps(psi)
    n = amps.shape[0].bit_length() - 1
    if len(basis) != n:
        raise ValueError(f"basis {basis!r} does not match {n} qubits")
    rotated = run(basis_rotation(basis), amps)
    rng = make_rng(seed)
    idx = draw_indices(rotated.probabilities(), shots, rng)
    if depolarizing > 0:
        swap = rng.random(shots) < depolarizing
        idx = np.where(swap, rng.integers(0, 1 << n, shots), idx)
    tally = np.bincount(idx, minlength=1 << n)
    counts = {format(i, f"0{n}b"): int(c) for i, c in enumerate(tally) if c}
    return ShotResult(basis.upper(), counts, shots, seed)


# --- Hadamard tests -----------------------------------------------------------


class SlotAnsatz(Protocol):
    n_qubits: int

    def gates(self, theta: Sequence[float], start: int = 0, stop: int | None = None) -> list[Gate]: ...

    def generator(self, slot: int) -> PauliTerm: ...

    @property
    def n_params(self) -> int: ...


@dataclass(frozen=True)
class HadamardTest:
    """Ancilla interference circuit with readout ``scale * (p0 - p1)``."""

    circuit: tuple[Gate, ...]
    n_system: int
    scale: float = 0.5
    label: str = field(default="", compare=False)

    @property
    def ancilla(self) -> int:
        return self.n_system

    def final_state(self, psi0: Statevector | np.ndarray) -> Statevector:
        sys = _as_amps(psi0)
        ext = np.concatenate([sys, np.zeros_like(sys)])
        return run(self.circuit, ext)

    def p0(self, psi0: Statevector | np.ndarray) -> float:
        amps = self.final_state(psi0).amps
        return float(np.sum(np.abs(amps[: amps.shape[0] // 2]) ** 2))

    def readout(self, p0: float) -> float:
        return self.scale * (2 * p0 - 1)

    def exact(self, psi0) -> float:
        return self.readout(self.p0(psi0))

    def sampled_p0(self, psi0, shots: int, seed: int) -> float:
        p0 = self.p0(psi0)
        hits = draw_indices(np.array([p0, 1 - p0]), shots, make_rng(seed))
        return float(np.count_nonzero(hits == 0)) / shots

    def sampled(self, psi0, shots: int, seed: int) -> float:
        return self.readout(self.sampled_p0(psi0, shots, seed))


def hadamard_test_m(ansatz: SlotAnsatz, theta: Sequence[float], k: int, q: int) -> HadamardTest:
    """Circuit whose readout p0 - 1/2 is the metric element M_kq."""
    if k > q:
        raise ValueError(f"need k <= q, got k={k}, q={q}")
    n = ansatz.n_qubits
    anc = n
    circ = [h(anc)]
    circ += _lift(ansatz.gates(theta, 0, k), n)
    circ.append(anti_controlled_pauli(anc, _extend(ansatz.generator(k), n + 1)))
    circ += _lift(ansatz.gates(theta, k, q), n)
    circ.append(controlled_pauli(anc, _extend(ansatz.generator(q), n + 1)))
    circ.append(h(anc))
    return HadamardTest(tuple(circ), n, 0.5, f"M[{k},{q}]")


def hadamard_test_v(
    ansatz: SlotAnsatz, theta: Sequence[float], k: int, term: PauliTerm
) -> HadamardTest:
    """Circuit whose readout p0 - 1/2 is V_km for the unit Hamiltonian string ``term``."""
    n = ansatz.n_qubits
    if not 0 <= k < ansatz.n_params:
        raise ValueError(f"slot {k} out of range")
    anc = n
    circ = [h(anc)]
    circ += _lift(ansatz.gates(theta, 0, k), n)
    circ.append(anti_controlled_pauli(anc, _extend(ansatz.generator(k), n + 1)))
    circ += _lift(ansatz.gates(theta, k, None), n)
    circ.append(controlled_pauli(anc, _extend(term.unit(), n + 1)))
    circ.append(h(anc))
    return HadamardTest(tuple(circ), n, 0.5, f"V[{k},{term.label}]")


def _extend(p: PauliTerm, n: int) -> PauliTerm:
    return PauliTerm(n, p.x_mask, p.z_mask, p.coeff)


def _lift(gates: Iterable[Gate], n: int) -> list[Gate]:
    out = []
    for g in gates:
        if g.pauli is not None:
            g = Gate(g.kind, g.targets, g.angle, _extend(g.pauli, n + 1), g.control)
        out.append(g)
    return out
