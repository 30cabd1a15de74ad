"""Weighted Pauli strings in symplectic (bitmask) form.

A term with masks ``(x, z)`` and coefficient ``c`` stands for the matrix
``c * X^x Z^z``, where ``X^x`` puts an X on every qubit whose bit is set in
``x`` (likewise for Z). Because ``XZ = -iY``, a qubit carrying both bits is a
Y up to a phase that lives in ``c``. Qubit 0 is the least significant bit of
a computational basis index; labels are written qubit ``n-1`` first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

import numpy as np
from scipy.linalg import hadamard

DROP_TOL = 1e-12
MATRIX_QUBIT_CAP = 12

_LABEL_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@lru_cache(maxsize=None)
def walsh(n: int) -> np.ndarray:
    """Sign table ``(-1)^{popcount(b & z)}`` indexed ``[b, z]``."""
    return hadamard(1 << n).astype(float)


@dataclass(frozen=True)
class PauliTerm:
    n_qubits: int
    x_mask: int
    z_mask: int
    coeff: complex = 1.0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full or self.x_mask < 0 or self.z_mask < 0:
            raise ValueError("mask exceeds qubit count")

    @classmethod
    def from_label(cls, label: str, weight: complex = 1.0) -> PauliTerm:
        """Build ``weight * label`` where label reads qubit n-1 first, e.g. ``"ZX"``."""
        x = z = 0
        n = len(label)
        for pos, ch in enumerate(label.upper()):
            q = n - 1 - pos
            try:
                bx, bz = _LABEL_BITS[ch]
            except KeyError:
                raise ValueError(f"bad Pauli symbol {ch!r}") from None
            x |= bx << q
            z |= bz << q
        n_y = _popcount(x & z)
        return cls(n, x, z, complex(weight) * (1j ** n_y))

    @property
    def key(self) -> tuple[int, int]:
        return (self.x_mask, self.z_mask)

    @property
    def label(self) -> str:
        out = []
        for q in reversed(range(self.n_qubits)):
            bx = (self.x_mask >> q) & 1
            bz = (self.z_mask >> q) & 1
            out.append("IXZY"[bx + 2 * bz])
        return "".join(out)

    @property
    def weight(self) -> complex:
        """Coefficient in front of the Hermitian string ``label``."""
        return self.coeff * (-1j) ** _popcount(self.x_mask & self.z_mask)

    def unit(self) -> PauliTerm:
        """Same string, weight 1 (a Hermitian, involutory Pauli operator)."""
        return PauliTerm.from_label(self.label)

    def __matmul__(self, other: PauliTerm) -> PauliTerm:
        return multiply(self, other)

    def __mul__(self, scalar) -> PauliTerm:
        return PauliTerm(self.n_qubits, self.x_mask, self.z_mask, self.coeff * scalar)

    __rmul__ = __mul__

    def to_matrix(self) -> np.ndarray:
        return to_matrix(PauliSum(self.n_qubits, [self]))

    def __repr__(self):
        return f"PauliTerm({self.weight:.6g}*{self.label})"


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")
    # X^a Z^b X^c Z^d = (-1)^{|b & c|} X^{a^c} Z^{b^d}
    sign = -1 if _popcount(a.z_mask & b.x_mask) & 1 else 1
    return PauliTerm(
        a.n_qubits,
        a.x_mask ^ b.x_mask,
        a.z_mask ^ b.z_mask,
        sign * a.coeff * b.coeff,
    )


class PauliSum:
    """Sum of Pauli terms with like terms merged on construction.

    Instances are treated as immutable values; arithmetic returns new sums.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: Iterable[PauliTerm] | Mapping[tuple[int, int], complex] = ()):
        self.n_qubits = n_qubits
        acc: dict[tuple[int, int], complex] = {}
        if isinstance(terms, Mapping):
            for key, c in terms.items():
                acc[key] = acc.get(key, 0) + complex(c)
        else:
            for t in terms:
                if t.n_qubits != n_qubits:
                    raise ValueError("all terms must share n_qubits")
                acc[t.key] = acc.get(t.key, 0) + complex(t.coeff)
        self._terms = acc

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> PauliSum:
        return cls(n_qubits, {(0, 0): coeff})

    @classmethod
    def from_table(cls, table: np.ndarray, tol: float = DROP_TOL) -> PauliSum:
        """Sum from a dense ``[x_mask, z_mask]`` coefficient table."""
        n = int(table.shape[0]).bit_length() - 1
        xs, zs = np.nonzero(np.abs(table) > tol)
        return cls(n, {(int(x), int(z)): complex(table[x, z]) for x, z in zip(xs, zs)})

    @classmethod
    def from_labels(cls, weights: Mapping[str, complex]) -> PauliSum:
        terms = [PauliTerm.from_label(lab, w) for lab, w in weights.items()]
        return cls(terms[0].n_qubits, terms)

    @property
    def terms(self) -> tuple[PauliTerm, ...]:
        return tuple(
            PauliTerm(self.n_qubits, x, z, c) for (x, z), c in sorted(self._terms.items())
        )

    def coeff(self, x_mask: int, z_mask: int) -> complex:
        return self._terms.get((x_mask, z_mask), 0j)

    def weights(self) -> dict[str, complex]:
        """Map from Hermitian label to its coefficient."""
        return {t.label: t.weight for t in self.terms}

    def __len__(self):
        return len(self._terms)

    def __iter__(self) -> Iterator[PauliTerm]:
        return iter(self.terms)

    def __add__(self, other: PauliSum) -> PauliSum:
        self._check(other)
        merged = dict(self._terms)
        for k, c in other._terms.items():
            merged[k] = merged.get(k, 0) + c
        return PauliSum(self.n_qubits, merged)

    def __sub__(self, other: PauliSum) -> PauliSum:
        return self + (-1) * other

    def __neg__(self) -> PauliSum:
        return (-1) * self

    def __mul__(self, scalar) -> PauliSum:
        return PauliSum(self.n_qubits, {k: c * scalar for k, c in self._terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: PauliSum | PauliTerm) -> PauliSum:
        if isinstance(other, PauliTerm):
            other = PauliSum(other.n_qubits, [other])
        self._check(other)
        out: list[PauliTerm] = []
        for a in self.terms:
            for b in other.terms:
                out.append(multiply(a, b))
        return PauliSum(self.n_qubits, out)

    def dagger(self) -> PauliSum:
        # (X^x Z^z)^dagger = Z^z X^x = (-1)^{|x & z|} X^x Z^z
        return PauliSum(
            self.n_qubits,
            {
                (x, z): np.conj(c) * (-1 if _popcount(x & z) & 1 else 1)
                for (x, z), c in self._terms.items()
            },
        )

    def simplify(self, tol: float = DROP_TOL) -> PauliSum:
        return simplify(self, tol)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        diff = (self - self.dagger()).simplify(tol)
        return len(diff) == 0

    def to_matrix(self, cap: int = MATRIX_QUBIT_CAP) -> np.ndarray:
        return to_matrix(self, cap)

    def _check(self, other: PauliSum):
        if other.n_qubits != self.n_qubits:
            raise ValueError(f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}")

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def __repr__(self):
        body = " + ".join(f"({t.weight:.6g}){t.label}" for t in self.terms) or "0"
        return f"PauliSum[{self.n_qubits}]({body})"


def from_ketbra(a: int, b: int, n: int) -> PauliSum:
    """Expand ``|a><b|`` over Pauli strings.

    Per qubit: ``|0><0| = (I+Z)/2``, ``|1><1| = (I-Z)/2``,
    ``|1><0| = X(I+Z)/2``, ``|0><1| = X(I-Z)/2``. Hence
    ``|a><b| = X^{a^b} 2^{-n} sum_z (-1)^{|b & z|} Z^z``.
    """
    size = 1 << n
    if not (0 <= a < size and 0 <= b < size):
        raise ValueError(f"basis word out of range for {n} qubits")
    x = a ^ b
    scale = 1.0 / size
    signs = walsh(n)[b]
    return PauliSum(n, {(x, z): scale * signs[z] for z in range(size)})


def ketbra_table(pairs: Iterable[tuple[int, int]], weights: Iterable[complex], n: int) -> np.ndarray:
    """Coefficient table of ``sum_j w_j |a_j><b_j|`` indexed ``[x_mask, z_mask]``."""
    size = 1 << n
    pairs = list(pairs)
    w = np.asarray(list(weights), dtype=complex)
    table = np.zeros((size, size), dtype=complex)
    if not pairs:
        return table
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    if a.min() < 0 or b.min() < 0 or a.max() >= size or b.max() >= size:
        raise ValueError(f"basis word out of range for {n} qubits")
    np.add.at(table, a ^ b, w[:, None] * walsh(n)[b])
    return table / size


def ketbra_sum(pairs, weights, n: int, tol: float = DROP_TOL) -> PauliSum:
    return PauliSum.from_table(ketbra_table(pairs, weights, n), tol)


def simplify(s: PauliSum, tol: float = DROP_TOL) -> PauliSum:
    """Drop terms with ``|coeff| <= tol``; like terms are already merged."""
    return PauliSum(
        s.n_qubits,
        {k: c for k, c in sorted(s._terms.items()) if abs(c) > tol},
    )


def to_matrix(s: PauliSum | PauliTerm, cap: int = MATRIX_QUBIT_CAP) -> np.ndarray:
    if isinstance(s, PauliTerm):
        s = PauliSum(s.n_qubits, [s])
    n = s.n_qubits
    if n > cap:
        raise ValueError(f"{n} qubits exceeds dense matrix cap {cap}")
    size = 1 << n
    cols = np.arange(size)
    signs = walsh(n)
    mat = np.zeros((size, size), dtype=complex)
    for (x, z), c in s._terms.items():
        # X^x Z^z |j> = (-1)^{|z & j|} |j ^ x>
        mat[cols ^ x, cols] += c * signs[z]
    return mat


def from_matrix(mat: np.ndarray, tol: float = DROP_TOL) -> PauliSum:
    """Pauli decomposition of a dense ``2^n x 2^n`` matrix."""
    size = mat.shape[0]
    n = size.bit_length() - 1
    if mat.shape != (size, size) or (1 << n) != size:
        raise ValueError("matrix must be square with power-of-two size")
    cols = np.arange(size)
    # entry (b^x, b) contributes to row x with Walsh signs of b
    gathered = np.stack([mat[cols ^ x, cols] for x in range(size)])
    table = gathered @ walsh(n) / size
    return PauliSum.from_table(table, tol)
