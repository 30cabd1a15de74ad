"""Tomography, qubit-to-Fock mapping, Wigner functions and quadrature moments."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .encoder import EncodedOperator
from .pauli import PauliTerm
from .sim import ShotResult, Statevector, apply_pauli

PAULI_LABELS = tuple("".join(p) for p in itertools.product("IXYZ", repeat=2))
MEASURED_BASES = tuple("".join(p) for p in itertools.product("XYZ", repeat=2))


@dataclass(frozen=True)
class DensityMatrix:
    n_qubits: int
    mat: np.ndarray

    def __post_init__(self):
        size = 1 << self.n_qubits
        if self.mat.shape != (size, size):
            raise ValueError(f"expected a {size}x{size} matrix")

    @classmethod
    def pure(cls, psi) -> DensityMatrix:
        amps = psi.amps if isinstance(psi, Statevector) else np.asarray(psi, dtype=complex)
        return cls(amps.shape[0].bit_length() - 1, np.outer(amps, amps.conj()))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.mat + self.mat.conj().T))

    def project_psd(self) -> DensityMatrix:
        """Clip negative eigenvalues to zero and renormalize the trace."""
        herm = 0.5 * (self.mat + self.mat.conj().T)
        vals, vecs = np.linalg.eigh(herm)
        vals = np.clip(vals, 0.0, None)
        vals /= vals.sum()
        return DensityMatrix(self.n_qubits, (vecs * vals) @ vecs.conj().T)


def _expectation_from_counts(counts: Mapping[str, int], label: str) -> tuple[float, int]:
    """Sum of +-1 outcomes for the non-identity positions of ``label``, and total shots."""
    positions = [i for i, ch in enumerate(label) if ch != "I"]
    total = 0
    shots = 0
    for bits, c in counts.items():
        parity = sum(bits[i] == "1" for i in positions) & 1
        total += -c if parity else c
        shots += c
    return total, shots


def tomography_coeffs(source) -> dict[str, float]:
    """The 16 coefficients tr(rho s1 x s0), keyed by label (qubit 1 first).

    ``source`` is either a two-qubit state (exact values) or a mapping from
    each of the nine measured bases to its ShotResult. Single-qubit terms
    pool the marginals of every basis that measures that Pauli.
    """
    if isinstance(source, Mapping):
        missing = [b for b in MEASURED_BASES if b not in source]
        if missing:
            raise ValueError(f"missing basis data for {missing}")
        out = {}
        for label in PAULI_LABELS:
            if label == "II":
                out[label] = 1.0
                continue
            bases = [b for b in MEASURED_BASES if all(l in ("I", m) for l, m in zip(label, b))]
            tot = shots = 0
            for b in bases:
                res: ShotResult = source[b]
                s, n = _expectation_from_counts(res.counts, label)
                tot += s
                shots += n
            out[label] = tot / shots
        return out
    amps = source.amps if isinstance(source, Statevector) else np.asarray(source, dtype=complex)
    if amps.shape != (4,):
        raise ValueError("tomography is defined for two qubits")
    out = {lab: float(np.vdot(amps, apply_pauli(amps, PauliTerm.from_label(lab))).real) for lab in PAULI_LABELS}
    out["II"] = 1.0
    return out


def coefficient_sigma(c: float, shots: int) -> float:
    """Binomial standard deviation of a +-1 average with mean c."""
    return math.sqrt(max(1 - c * c, 0.0) / shots)


def reconstruct(coeffs: Mapping[str, float], psd: bool = False) -> DensityMatrix:
    """rho = sum_ij c_ij / 4 s_i x s_j."""
    if abs(coeffs.get("II", 1.0) - 1.0) > 1e-12:
        raise ValueError("II coefficient must be 1")
    mat = np.zeros((4, 4), dtype=complex)
    for label in PAULI_LABELS:
        mat += coeffs.get(label, 1.0 if label == "II" else 0.0) / 4 * PauliTerm.from_label(label).to_matrix()
    rho = DensityMatrix(2, mat)
    return rho.project_psd() if psd else rho


def state_fidelity(rho: DensityMatrix, target) -> float:
    amps = target.amps if isinstance(target, Statevector) else np.asarray(target, dtype=complex)
    if amps.shape[0] != rho.mat.shape[0]:
        raise ValueError("dimension mismatch")
    return float(np.vdot(amps, rho.mat @ amps).real)


# --- qubit <-> Fock ----------------------------------------------------------


def qubit_to_fock(rho: DensityMatrix | np.ndarray, e: EncodedOperator) -> np.ndarray:
    """rho_F[p_i, p_j] = rho[c_i, c_j] in dimension max_photon + 1."""
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if mat.shape[0] != len(e.code):
        raise ValueError("density matrix does not match the code size")
    words = np.array(e.code.words)
    photons = np.array(e.photon_of_index)
    out = np.zeros((e.max_photon + 1,) * 2, dtype=complex)
    out[np.ix_(photons, photons)] = mat[np.ix_(words, words)]
    return out


def qubit_state_to_fock(psi, e: EncodedOperator) -> np.ndarray:
    amps = psi.amps if isinstance(psi, Statevector) else np.asarray(psi, dtype=complex)
    if amps.shape[0] != len(e.code):
        raise ValueError("state does not match the code size")
    out = np.zeros(e.max_photon + 1, dtype=complex)
    out[list(e.photon_of_index)] = amps[list(e.code.words)]
    return out


def as_density(rho_f) -> np.ndarray:
    """Accept a Fock vector or matrix and return a density matrix."""
    arr = np.asarray(rho_f, dtype=complex)
    return np.outer(arr, arr.conj()) if arr.ndim == 1 else arr


# --- Wigner -----------------------------------------------------------------


@dataclass(frozen=True)
class WignerGrid:
    x_values: np.ndarray
    p_values: np.ndarray
    w: np.ndarray  # indexed [p, x]

    def integral(self) -> float:
        dx = self.x_values[1] - self.x_values[0]
        dp = self.p_values[1] - self.p_values[0]
        return float(self.w.sum() * dx * dp)

    def purity(self) -> float:
        """2 pi int W^2, equal to tr(rho^2)."""
        dx = self.x_values[1] - self.x_values[0]
        dp = self.p_values[1] - self.p_values[0]
        return float(2 * math.pi * (self.w**2).sum() * dx * dp)


def wigner(rho_f, x_grid, p_grid) -> WignerGrid:
    """W(x, p) = (1/pi) tr[rho D(a) Parity D(a)^dag], a = (x + ip)/sqrt(2).

    D(a) Parity D(a)^dag = D(2a) Parity, and <n|D(b)|m> for n >= m is
    sqrt(m!/n!) b^(n-m) e^{-|b|^2/2} L_m^(n-m)(|b|^2). Terms are grouped by
    band d = n - m; the Laguerre values come from the three-term recurrence.
    """
    rho = as_density(rho_f)
    dim = rho.shape[0]
    x = np.asarray(x_grid, dtype=float)
    p = np.asarray(p_grid, dtype=float)
    xx, pp = np.meshgrid(x, p)
    beta = np.sqrt(2.0) * (xx + 1j * pp)
    u = np.abs(beta) ** 2
    total = np.zeros_like(u)
    beta_pow = np.ones_like(beta)
    for d in range(dim):
        band = np.array([rho[m, m + d] for m in range(dim - d)])
        if np.any(np.abs(band) > 0):
            acc = np.zeros_like(beta)
            lag_prev = np.zeros_like(u)
            lag = np.ones_like(u)
            # sqrt(m!/(m+d)!) built incrementally
            norm = 1.0 / math.sqrt(math.prod(range(1, d + 1)) or 1)
            for m in range(dim - d):
                if m > 0:
                    lag, lag_prev = ((2 * m - 1 + d - u) * lag - (m - 1 + d) * lag_prev) / m, lag
                    norm *= math.sqrt(m / (m + d))
                acc += band[m] * (-1) ** m * norm * lag
            term = (acc * beta_pow).real
            total += term if d == 0 else 2 * term
        beta_pow = beta_pow * beta
    w = np.exp(-u / 2) * total / math.pi
    return WignerGrid(x, p, w)


def _pad(rho: np.ndarray) -> np.ndarray:
    dim = rho.shape[0]
    out = np.zeros((dim + 1, dim + 1), dtype=complex)
    out[:dim, :dim] = rho
    return out


def quadrature_covariance(rho_f) -> np.ndarray:
    """Symmetrized covariance of x = (b + b^dag)/sqrt 2, p = (b - b^dag)/(i sqrt 2).

    The state is padded by one level so b^dag acting on the top level is not cut.
    """
    rho = _pad(as_density(rho_f))
    dim = rho.shape[0]
    b = np.diag(np.sqrt(np.arange(1, dim)), 1)
    xo = (b + b.T) / math.sqrt(2)
    po = (b - b.T) / (1j * math.sqrt(2))

    def ev(op):
        return np.trace(rho @ op).real

    mx, mp = ev(xo), ev(po)
    cxx = ev(xo @ xo) - mx * mx
    cpp = ev(po @ po) - mp * mp
    cxp = 0.5 * ev(xo @ po + po @ xo) - mx * mp
    return np.array([[cxx, cxp], [cxp, cpp]])


def squeezing_angle(cov: np.ndarray) -> float:
    """Angle (radians, in (-pi/2, pi/2]) of the minimum-variance quadrature axis from x."""
    vals, vecs = np.linalg.eigh(cov)
    vx, vp = vecs[:, 0]
    ang = math.atan2(vp, vx)
    if ang <= -math.pi / 2:
        ang += math.pi
    elif ang > math.pi / 2:
        ang -= math.pi
    return ang


# --- exports ----------------------------------------------------------------


def wigner_csv(grid: WignerGrid) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "p", "w"])
    for i, pv in enumerate(grid.p_values):
        for j, xv in enumerate(grid.x_values):
            w.writerow([repr(float(xv)), repr(float(pv)), repr(float(grid.w[i, j]))])
    return buf.getvalue()


def density_json(rho: DensityMatrix | np.ndarray, **extra) -> str:
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    doc = {"real": mat.real.tolist(), "imag": mat.imag.tolist(), **extra}
    return json.dumps(doc, indent=2, sort_keys=True)
