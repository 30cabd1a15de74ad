"""McLachlan variational quantum simulation with a Hamiltonian variational ansatz.

Every parameter slot applies exp(-i P theta / 2). Writing
phi_k = Gamma_{K-1..k} P_k Gamma_{k-1..0} psi0, the derivative of the ansatz
state is -(i/2) phi_k, and with eta = -i the McLachlan system reads

    M_kq = 1/2 Re <phi_k|phi_q>,    V_k = sum_m xi_m Re <phi_k|P_m|psi>.

Both sides carry a common factor 2 relative to Re<d_k psi|d_q psi>; it
cancels in theta_dot and makes M_kq = p0 - 1/2 the literal Hadamard readout.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import fock
from .analysis import qubit_state_to_fock
from .codes import gray
from .encoder import EncodedOperator, encode_even_b2, squeeze_hamiltonian_encoded
from .pauli import PauliSum, PauliTerm
from .sim import Gate, Statevector, apply_pauli, expectation, hadamard_test_m, hadamard_test_v, pauli_exp, run

MODES = ("analytic", "circuit-exact", "circuit-sampled")
SINGULAR_RCOND = 1e-10
SAMPLED_LAMBDA = 1e-6


class NonFiniteDynamicsError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Ansatz:
    generators: tuple[PauliTerm, ...]
    layers: int = 1

    def __post_init__(self):
        if not self.generators:
            raise ValueError("ansatz needs at least one generator")
        if self.layers < 1:
            raise ValueError("layers must be >= 1")

    @property
    def n_qubits(self) -> int:
        return self.generators[0].n_qubits

    @property
    def n_params(self) -> int:
        return self.layers * len(self.generators)

    def generator(self, slot: int) -> PauliTerm:
        return self.generators[slot % len(self.generators)]

    def gates(self, theta: Sequence[float], start: int = 0, stop: int | None = None) -> list[Gate]:
        stop = self.n_params if stop is None else stop
        if len(theta) != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {len(theta)}")
        return [pauli_exp(self.generator(s), theta[s]) for s in range(start, stop)]

    def state(self, theta: Sequence[float], psi0) -> np.ndarray:
        return run(self.gates(theta), psi0).amps


def build_vha(h: PauliSum, layers: int = 1) -> Ansatz:
    """One slot per non-identity Pauli string of ``h`` (mask order), repeated per layer."""
    strings = [t.unit() for t in h.simplify().terms if t.key != (0, 0)]
    if not strings:
        raise ValueError("Hamiltonian has no non-identity terms")
    return Ansatz(tuple(strings), layers)


def hamiltonian_terms(h: PauliSum) -> list[tuple[float, PauliTerm]]:
    """(xi_m, P_m) pairs with real weights; raises for a non-Hermitian sum."""
    out = []
    for t in h.simplify().terms:
        w = t.weight
        if abs(w.imag) > 1e-12:
            raise ValueError(f"non-Hermitian term {t.label} with weight {w}")
        out.append((w.real, t.unit()))
    return out


@dataclass
class VQSRun:
    hamiltonian: PauliSum
    ansatz: Ansatz
    psi0: np.ndarray
    dt: float = 0.01
    t_final: float = 0.0
    mode: str = "analytic"
    shots: int = 50_000
    seed: int = 0
    lam: float | None = None
    encoding: EncodedOperator | None = None
    # Fock-space targets keyed by column name; the first is the headline fidelity
    references: dict[str, Callable[[float], np.ndarray]] = field(default_factory=dict)
    record_times: tuple[float, ...] = ()
    times: list[float] = field(default_factory=list)
    thetas: list[np.ndarray] = field(default_factory=list)
    fidelities: dict[str, list[float]] = field(default_factory=dict)
    energies: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_final < 0:
            raise ValueError("t_final must be nonnegative")
        self.psi0 = np.asarray(self.psi0, dtype=complex)

    @property
    def regularization(self) -> float:
        if self.lam is not None:
            return self.lam
        return SAMPLED_LAMBDA if self.mode == "circuit-sampled" else 0.0

    @property
    def fidelity(self) -> list[float]:
        """Headline fidelity trace (first reference)."""
        if not self.fidelities:
            return []
        return next(iter(self.fidelities.values()))

    def theta_at(self, t: float, tol: float = 1e-9) -> np.ndarray:
        for ti, th in zip(self.times, self.thetas):
            if abs(ti - t) <= tol:
                return th
        raise KeyError(f"time {t} not on the recorded trajectory")


def _phis(run_: VQSRun, theta) -> tuple[list[np.ndarray], np.ndarray]:
    ans = run_.ansatz
    psi = Statevector(run_.psi0)
    phis = []
    for k in range(ans.n_params):
        inserted = apply_pauli(psi.amps, ans.generator(k))
        phis.append(run(ans.gates(theta, k, None), inserted).amps)
        psi = run(ans.gates(theta, k, k + 1), psi)
    return phis, psi.amps


def compute_mv_analytic(run_: VQSRun, theta) -> tuple[np.ndarray, np.ndarray]:
    theta = np.asarray(theta, dtype=float)
    phis, psi = _phis(run_, theta)
    big = np.stack(phis)
    m = 0.5 * (big.conj() @ big.T).real
    h_psi = sum((xi * apply_pauli(psi, p) for xi, p in hamiltonian_terms(run_.hamiltonian)), np.zeros_like(psi))
    v = (big.conj() @ h_psi).real
    return m, v


def compute_mv_circuit(run_: VQSRun, theta, step: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """M and V from Hadamard-test circuits, exact or shot-sampled per ``run_.mode``.

    In sampled mode each circuit gets seed ``run_.seed ^ task_id`` where the
    task id enumerates (step, element) so runs are reproducible.
    """
    theta = np.asarray(theta, dtype=float)
    ans = run_.ansatz
    k_total = ans.n_params
    terms = hamiltonian_terms(run_.hamiltonian)
    per_step = k_total * (k_total + 1) // 2 + k_total * len(terms)
    sampled = run_.mode == "circuit-sampled"
    task = step * per_step

    def evaluate(test) -> float:
        nonlocal task
        task += 1
        if sampled:
            return test.sampled(run_.psi0, run_.shots, run_.seed ^ task)
        return test.exact(run_.psi0)

    m = np.zeros((k_total, k_total))
    for k in range(k_total):
        for q in range(k, k_total):
            m[k, q] = m[q, k] = evaluate(hadamard_test_m(ans, theta, k, q))
    v = np.zeros(k_total)
    for k in range(k_total):
        for xi, p in terms:
            v[k] += 2 * xi * evaluate(hadamard_test_v(ans, theta, k, p))
    return m, v


def solve_step(m: np.ndarray, v: np.ndarray, lam: float = 0.0) -> np.ndarray:
    """argmin |M x - V|^2 + lam |x|^2; lam = 0 gives the minimal-norm least-squares solution."""
    m = np.asarray(m, dtype=float)
    v = np.asarray(v, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or v.shape != (m.shape[0],):
        raise ValueError("M must be square and match V")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if lam == 0:
        return np.linalg.lstsq(m, v, rcond=SINGULAR_RCOND)[0]
    return np.linalg.solve(m.T @ m + lam * np.eye(m.shape[0]), m.T @ v)


def _time_points(t_final: float, dt: float, extra: Sequence[float]) -> list[float]:
    n = math.ceil(t_final / dt - 1e-9)
    pts = [min(j * dt, t_final) for j in range(n + 1)]
    pts += [t for t in extra if 0 <= t <= t_final]
    pts.sort()
    out = [pts[0]]
    for t in pts[1:]:
        if t - out[-1] > 1e-12:
            out.append(t)
    return out


def _record(run_: VQSRun, t: float, theta: np.ndarray):
    state = run_.ansatz.state(theta, run_.psi0)
    run_.times.append(t)
    run_.thetas.append(theta.copy())
    run_.energies.append(expectation(run_.hamiltonian, state).real)
    if run_.references:
        if run_.encoding is None:
            raise ValueError("references need an encoding to map qubit states to Fock space")
        mapped = qubit_state_to_fock(state, run_.encoding)
        for name, ref in run_.references.items():
            run_.fidelities.setdefault(name, []).append(float(abs(np.vdot(ref(t), mapped)) ** 2))


def run_evolution(run_: VQSRun) -> VQSRun:
    """Forward-Euler integration of the McLachlan equations from theta = 0."""
    run_.times.clear()
    run_.thetas.clear()
    run_.fidelities.clear()
    run_.energies.clear()
    theta = np.zeros(run_.ansatz.n_params)
    points = _time_points(run_.t_final, run_.dt, run_.record_times)
    _record(run_, points[0], theta)
    for step, (t0, t1) in enumerate(zip(points, points[1:])):
        if run_.mode == "analytic":
            m, v = compute_mv_analytic(run_, theta)
        else:
            m, v = compute_mv_circuit(run_, theta, step)
        theta_dot = solve_step(m, v, run_.regularization)
        if not np.all(np.isfinite(theta_dot)):
            raise NonFiniteDynamicsError(
                f"non-finite theta_dot at t={t0:.6g}: cond(M)={np.linalg.cond(m):.3g}, V={v}"
            )
        theta = theta + theta_dot * (t1 - t0)
        _record(run_, t1, theta)
    return run_


# --- the squeezing setting --------------------------------------------------

SQUEEZE_FOCK_DIM = 7


def squeeze_references(phi_z: float) -> dict[str, Callable[[float], np.ndarray]]:
    """Fock-space targets on levels 0..6 for the even-photon squeezing run.

    ``dynamics`` is exp(-i H t)|0> with H truncated to 7 levels; ``squeezed``
    is the renormalized truncation of S(z)|0>; ``squeezed_unnormalized``
    keeps the raw truncated amplitudes (overlap scaled by P(r)).
    """
    h = fock.squeeze_hamiltonian(phi_z, SQUEEZE_FOCK_DIM)
    vac = fock.FockState.basis(SQUEEZE_FOCK_DIM)
    n_max = SQUEEZE_FOCK_DIM - 1
    return {
        "dynamics": lambda t: fock.propagate(h, t, vac),
        "squeezed": lambda t: fock.exact_squeezed_state(t, phi_z, n_max).amps,
        "squeezed_unnormalized": lambda t: fock.squeezed_amplitudes(t, phi_z, n_max),
    }


def squeeze_run(
    phi_z: float = math.pi / 2,
    t_final: float = 0.0,
    layers: int = 1,
    dt: float = 0.01,
    mode: str = "analytic",
    shots: int = 50_000,
    seed: int = 0,
    lam: float | None = None,
    record_times: Sequence[float] = (),
) -> VQSRun:
    """Even-photon Gray-coded squeezing simulation starting from the vacuum."""
    code = gray(2)
    h = squeeze_hamiltonian_encoded(phi_z, code)
    enc = encode_even_b2(2, code)
    psi0 = Statevector.basis(2, code[0]).amps
    return VQSRun(
        hamiltonian=h,
        ansatz=build_vha(h, layers),
        psi0=psi0,
        dt=dt,
        t_final=t_final,
        mode=mode,
        shots=shots,
        seed=seed,
        lam=lam,
        encoding=enc,
        references=squeeze_references(phi_z),
        record_times=tuple(record_times),
    )


@dataclass(frozen=True)
class SweepPoint:
    r: float
    benchmark: float  # captured weight P(r) of the truncated-exact state
    dynamics_vs_squeezed: float
    vqs: float  # VQS state against the truncated dynamics
    vqs_vs_squeezed: float
    vqs_unnormalized: float


def fidelity_sweep(r_values: Sequence[float], **kwargs) -> tuple[list[SweepPoint], VQSRun]:
    """One trajectory to max(r), read out at each r (squeezing time t = r)."""
    r_values = [float(r) for r in r_values]
    phi_z = kwargs.get("phi_z", math.pi / 2)
    run_ = run_evolution(squeeze_run(t_final=max(r_values), record_times=r_values, **kwargs))
    refs = squeeze_references(phi_z)
    points = []
    for r in r_values:
        i = min(range(len(run_.times)), key=lambda j: abs(run_.times[j] - r))
        n_max = SQUEEZE_FOCK_DIM - 1
        points.append(
            SweepPoint(
                r=r,
                benchmark=fock.captured_weight(r, n_max),
                dynamics_vs_squeezed=fock.fidelity(refs["dynamics"](r), refs["squeezed"](r)),
                vqs=run_.fidelities["dynamics"][i],
                vqs_vs_squeezed=run_.fidelities["squeezed"][i],
                vqs_unnormalized=run_.fidelities["squeezed_unnormalized"][i],
            )
        )
    return points, run_


# --- serialization ----------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def trajectory_csv(run_: VQSRun) -> str:
    k = run_.ansatz.n_params
    names = list(run_.fidelities)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["t"] + [f"theta_{j}" for j in range(k)]
    header += ["fidelity"] + [f"fidelity_{n}" for n in names] + ["energy"]
    w.writerow(header)
    for i, t in enumerate(run_.times):
        fids = [run_.fidelities[n][i] for n in names]
        head = fids[0] if fids else 1.0
        row = [t, *run_.thetas[i], head, *fids, run_.energies[i]]
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def sweep_csv(points: Sequence[SweepPoint], sampled: Sequence[float] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["r", "truncated_exact", "dynamics_vs_squeezed", "vqs", "vqs_vs_squeezed", "vqs_unnormalized"]
    if sampled is not None:
        header.append("vqs_sampled")
    w.writerow(header)
    for i, p in enumerate(points):
        row = [p.r, p.benchmark, p.dynamics_vs_squeezed, p.vqs, p.vqs_vs_squeezed, p.vqs_unnormalized]
        if sampled is not None:
            row.append(sampled[i])
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()
