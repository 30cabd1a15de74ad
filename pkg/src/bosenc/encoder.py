"""Qubit-space Pauli representations of bosonic ladder operators under a code."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .codes import Code, gray, iter_codes
from .pauli import DROP_TOL, PauliSum, PauliTerm, from_ketbra, ketbra_table, walsh


@dataclass(frozen=True)
class EncodedOperator:
    code: Code
    fock_dim: int
    photon_of_index: tuple[int, ...]
    op: PauliSum

    @property
    def n_qubits(self) -> int:
        return self.code.n

    @property
    def max_photon(self) -> int:
        return max(self.photon_of_index)


def _sqrt_int(v: int) -> float:
    # float(v) overflows past ~1e308; shift into range first
    shift = max(0, (v.bit_length() - 1000) // 2)
    return math.sqrt(v >> (2 * shift)) * 2.0**shift


def ladder_weight(i: int, k: int) -> float:
    """sqrt((i+k)!/i!), the amplitude of <i| b^k |i+k>."""
    return _sqrt_int(math.prod(range(i + 1, i + k + 1)))


def projector(code: Code, i: int) -> PauliSum:
    """|c_i><c_i| as a Z/I-only sum with coefficients (-1)^{W(c_i & alpha)} / 2^n."""
    if not 0 <= i < len(code):
        raise ValueError(f"Fock index {i} out of range")
    return from_ketbra(code[i], code[i], code.n)


def transition_mask(code: Code, i: int) -> int:
    """X-mask of the flip taking c_i to c_{i-1}."""
    return code[i] ^ code[i - 1]


def encode_b(code: Code) -> EncodedOperator:
    """b = sum_i sqrt(i) X_{i,i-1} P_i, built term by term."""
    n = code.n
    op = PauliSum(n)
    for i in range(1, len(code)):
        flip = PauliTerm(n, transition_mask(code, i), 0, math.sqrt(i))
        op = op + PauliSum(n, [flip]) @ projector(code, i)
    return EncodedOperator(code, len(code), tuple(range(len(code))), op.simplify())


def _ketbra_op(code: Code, k: int, weight) -> PauliSum:
    pairs = [(code[i], code[i + k]) for i in range(len(code) - k)]
    weights = [weight(i) for i in range(len(code) - k)]
    return PauliSum.from_table(ketbra_table(pairs, weights, code.n))


def encode_b_ketbra(code: Code) -> EncodedOperator:
    """b from the direct expansion of each |c_{i-1}><c_i|."""
    op = _ketbra_op(code, 1, lambda i: math.sqrt(i + 1))
    return EncodedOperator(code, len(code), tuple(range(len(code))), op)


def encode_b_power(code: Code, k: int) -> EncodedOperator:
    """Truncated b^k = sum_i sqrt((i+k)!/i!) |c_i><c_{i+k}|."""
    if not 1 <= k <= len(code) - 1:
        raise ValueError(f"power k={k} out of range for {len(code)} levels")
    op = _ketbra_op(code, k, lambda i: ladder_weight(i, k))
    return EncodedOperator(code, len(code), tuple(range(len(code))), op)


def encode_even_b2(m: int, code: Code | None = None) -> EncodedOperator:
    """b^2 on the even-photon levels {0, 2, ..., 2(2^m - 1)} with |2i>_F -> |c_i>."""
    code = gray(m) if code is None else code
    if code.n != m:
        raise ValueError(f"code has {code.n} qubits, expected {m}")
    op = _ketbra_op(code, 1, lambda i: math.sqrt((2 * i + 2) * (2 * i + 1)))
    photons = tuple(2 * i for i in range(len(code)))
    return EncodedOperator(code, len(code), photons, op)


def term_count(e: EncodedOperator | PauliSum, tol: float = DROP_TOL) -> int:
    op = e.op if isinstance(e, EncodedOperator) else e
    return len(op.simplify(tol))


def encode_squeeze_hamiltonian(phi_z: float, code: Code | None = None) -> tuple[PauliSum, PauliSum]:
    """Even-photon squeezing Hamiltonian split into its cos and sin parts.

    H = (1/2)[e^{-i(phi - pi/2)} B - e^{i(phi + pi/2)} B^dag] with B the encoded
    b^2, which rearranges to cos(phi) (i/2)(B - B^dag) + sin(phi) (1/2)(B + B^dag).
    """
    code = gray(2) if code is None else code
    b2 = encode_even_b2(code.n, code).op
    b2d = b2.dagger()
    h_r = (0.5j * math.cos(phi_z)) * (b2 - b2d)
    h_i = (0.5 * math.sin(phi_z)) * (b2 + b2d)
    return h_r.simplify(), h_i.simplify()


def squeeze_hamiltonian_encoded(phi_z: float, code: Code | None = None) -> PauliSum:
    h_r, h_i = encode_squeeze_hamiltonian(phi_z, code)
    return (h_r + h_i).simplify()


# --- dense references -------------------------------------------------------


def permutation_matrix(code: Code) -> np.ndarray:
    """Pi with Pi |i> = |c_i>."""
    size = len(code)
    pi = np.zeros((size, size))
    pi[list(code), np.arange(size)] = 1.0
    return pi


def fock_power_matrix(levels: int, k: int, photons: Iterable[int] | None = None) -> np.ndarray:
    """Truncated b^k restricted to the listed photon numbers (default 0..levels-1)."""
    photons = list(range(levels)) if photons is None else list(photons)
    index = {p: j for j, p in enumerate(photons)}
    mat = np.zeros((len(photons), len(photons)))
    for j, p in enumerate(photons):
        if p + k in index:
            mat[j, index[p + k]] = ladder_weight(p, k)
    return mat


# --- batched term counting --------------------------------------------------


def _batch_tables(words: np.ndarray, k: int, weights: np.ndarray) -> np.ndarray:
    n_codes, size = words.shape
    n = size.bit_length() - 1
    a = words[:, :-k]
    b = words[:, k:]
    tables = np.zeros((n_codes, size, size))
    rows = np.repeat(np.arange(n_codes), size - k)
    contrib = weights[None, :, None] * walsh(n)[b]
    np.add.at(tables, (rows, (a ^ b).ravel()), contrib.reshape(-1, size))
    return tables / size


def term_histogram(n: int, k: int = 1, chunk: int = 8192, tol: float = DROP_TOL) -> Counter:
    """Distribution of term counts of encoded b^k over every code of ``C_n``."""
    size = 1 << n
    if n > 3:
        raise ValueError("exhaustive histogram only supported for n <= 3")
    weights = np.array([ladder_weight(i, k) for i in range(size - k)])
    hist: Counter = Counter()
    it = iter_codes(n)
    while True:
        block = np.array(list(itertools.islice(it, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        # coefficients are real here: b^k has real amplitudes, Walsh signs are real
        counts = (np.abs(_batch_tables(block, k, weights)) > tol).sum(axis=(1, 2))
        hist.update(counts.tolist())
    return hist

