"""Exact truncated Fock-space oracle for single-mode squeezing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

REFERENCE_DIM = 40


@dataclass(frozen=True)
class FockOperator:
    mat: np.ndarray

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.mat - self.mat.conj().T), initial=0.0) <= tol)


@dataclass(frozen=True)
class FockState:
    amps: np.ndarray
    # squared norm of the kept components before renormalization
    captured_weight: float = field(default=1.0, compare=False)

    def __post_init__(self):
        norm = np.linalg.norm(self.amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"FockState must be unit norm, got {norm}")

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    @classmethod
    def basis(cls, dim: int, n: int = 0) -> FockState:
        amps = np.zeros(dim, dtype=complex)
        amps[n] = 1.0
        return cls(amps)


def annihilation(dim: int) -> FockOperator:
    if dim < 2:
        raise ValueError("truncation dimension must be at least 2")
    return FockOperator(np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex))


def creation(dim: int) -> FockOperator:
    return FockOperator(annihilation(dim).mat.conj().T)


def number(dim: int) -> FockOperator:
    return FockOperator(np.diag(np.arange(dim)).astype(complex))


def squeeze_hamiltonian(phi_z: float, dim: int) -> FockOperator:
    """H = 1/2 [e^{-i(phi - pi/2)} b^2 - e^{i(phi + pi/2)} b^dag^2], so S(z) = exp(-i H r)."""
    b = annihilation(dim).mat
    b2 = b @ b
    h = 0.5 * (np.exp(-1j * (phi_z - math.pi / 2)) * b2 - np.exp(1j * (phi_z + math.pi / 2)) * b2.conj().T)
    return FockOperator(h)


def squeezed_amplitudes(r: float, phi_z: float, n_max: int) -> np.ndarray:
    """Untruncated-normalization amplitudes of S(z)|0> on levels 0..n_max.

    amp[2m] = mu^{-1/2} (-nu / 2 mu)^m sqrt((2m)!) / m!, with mu = cosh r and
    nu = e^{i phi} sinh r; the ratio recursion avoids large factorials.
    """
    mu = math.cosh(r)
    ratio = -np.exp(1j * phi_z) * math.sinh(r) / (2 * mu)
    amps = np.zeros(n_max + 1, dtype=complex)
    c = 1.0 / math.sqrt(mu) + 0j
    for m in range(n_max // 2 + 1):
        amps[2 * m] = c
        c *= ratio * math.sqrt((2 * m + 1) * (2 * m + 2)) / (m + 1)
    return amps


def exact_squeezed_state(r: float, phi_z: float, n_max: int) -> FockState:
    """Squeezed vacuum truncated at ``n_max`` photons and renormalized."""
    if n_max % 2:
        raise ValueError("n_max must be even")
    amps = squeezed_amplitudes(r, phi_z, n_max)
    weight = float(np.vdot(amps, amps).real)
    return FockState(amps / math.sqrt(weight), captured_weight=min(weight, 1.0))


def captured_weight(r: float, n_max: int) -> float:
    """Probability the full squeezed vacuum has at most ``n_max`` photons.

    This is also the fidelity between the renormalized truncation and the
    full state, which is the truncated-exact benchmark curve.
    """
    return exact_squeezed_state(r, 0.0, n_max - n_max % 2).captured_weight


def propagate(h: FockOperator | np.ndarray, t: float, psi0: FockState | np.ndarray) -> np.ndarray:
    """exp(-i H t) psi0 through the eigendecomposition of Hermitian H."""
    mat = h.mat if isinstance(h, FockOperator) else np.asarray(h)
    vec = psi0.amps if isinstance(psi0, FockState) else np.asarray(psi0)
    if mat.shape[0] != vec.shape[0]:
        raise ValueError("dimension mismatch between H and state")
    if np.max(np.abs(mat - mat.conj().T), initial=0.0) > 1e-10:
        raise ValueError("propagate requires a Hermitian generator")
    evals, evecs = np.linalg.eigh(mat)
    return evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ vec))


def fidelity(a: FockState | np.ndarray, b: FockState | np.ndarray) -> float:
    va = a.amps if isinstance(a, FockState) else np.asarray(a)
    vb = b.amps if isinstance(b, FockState) else np.asarray(b)
    if va.shape != vb.shape:
        raise ValueError("dimension mismatch")
    return float(abs(np.vdot(va, vb)) ** 2)


def mean_photon_number(state: FockState | np.ndarray) -> float:
    v = state.amps if isinstance(state, FockState) else np.asarray(state)
    return float(np.sum(np.arange(v.shape[0]) * np.abs(v) ** 2))


def truncation_radius(n_photons: float) -> float:
    """Squeezing r at which the full state's mean photon number sinh^2 r hits ``n_photons``."""
    return math.asinh(math.sqrt(n_photons))
