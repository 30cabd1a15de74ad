import math
from collections import Counter

import numpy as np
import pytest

from bosenc.codes import Code, binary, find_kfold, gray, is_unit_distance, iter_codes, unrank
from bosenc.encoder import (
    _batch_tables,
    encode_b,
    encode_b_ketbra,
    encode_b_power,
    encode_even_b2,
    encode_squeeze_hamiltonian,
    fock_power_matrix,
    ladder_weight,
    permutation_matrix,
    projector,
    term_count,
    term_histogram,
)
from bosenc.pauli import PauliSum, from_matrix, to_matrix

S2, S3, S12, S30 = (math.sqrt(v) for v in (2, 3, 12, 30))


def assert_weights(op: PauliSum, expected: dict, tol=1e-12):
    got = op.weights()
    assert set(got) == set(expected)
    for lab, w in expected.items():
        assert abs(got[lab] - w) <= tol, lab


def conjugated_fock(code: Code, k: int = 1, photons=None) -> np.ndarray:
    pi = permutation_matrix(code)
    return pi @ fock_power_matrix(len(code), k, photons) @ pi.T


def random_codes(n, count, seed):
    rng = np.random.default_rng(seed)
    return [Code(rng.permutation(1 << n)) for _ in range(count)]


def random_unit_distance(n, rng, moves=400) -> Code:
    """Random Hamiltonian path on the n-cube via backbite moves from the gray path."""
    path = list(gray(n).words)
    for _ in range(moves):
        if rng.integers(2):
            path.reverse()
        end = path[-1]
        nb = end ^ (1 << int(rng.integers(n)))
        j = path.index(nb)
        if j != len(path) - 2:
            path[j + 1 :] = path[j + 1 :][::-1]
    return Code(path)


def test_projector_worked_example():
    code = Code([0, 1, 3, 2])
    # |11><11| is the projector on word 3, which sits at Fock index 2
    assert_weights(projector(code, 2), {"II": 0.25, "IZ": -0.25, "ZI": -0.25, "ZZ": 0.25})
    # index 1 holds word 01
    assert_weights(projector(code, 1), {"II": 0.25, "IZ": -0.25, "ZI": 0.25, "ZZ": -0.25})


@pytest.mark.parametrize("code", [gray(3), unrank(3, 777), binary(2)])
def test_projectors_sum_to_identity(code):
    total = PauliSum(code.n)
    for i in range(len(code)):
        total = total + projector(code, i)
    assert total.simplify() == PauliSum.identity(code.n)


def test_projector_is_diagonal_indicator():
    code = unrank(3, 1234)
    for i in range(8):
        expected = np.zeros((8, 8))
        expected[code[i], code[i]] = 1
        np.testing.assert_allclose(to_matrix(projector(code, i)), expected, atol=1e-15)


def test_projector_index_checked():
    with pytest.raises(ValueError):
        projector(gray(2), 4)


def test_single_qubit_ladder():
    assert_weights(encode_b(Code([0, 1])).op, {"X": 0.5, "Y": 0.5j})


def test_worked_two_qubit_b():
    expected = {
        "IX": (1 + S3) / 4,
        "IY": 1j * (1 - S3) / 4,
        "XI": S2 / 4,
        "YI": 1j * S2 / 4,
        "ZX": (1 - S3) / 4,
        "ZY": 1j * (1 + S3) / 4,
        "XZ": -S2 / 4,
        "YZ": -1j * S2 / 4,
    }
    assert_weights(encode_b(unrank(2, 1)).op, expected)


def test_gray_three_has_n_times_two_to_n_terms():
    assert term_count(encode_b(gray(3))) == 24


def test_term_count_trivial():
    assert term_count(encode_b(Code([0, 1]))) == 2


@pytest.mark.parametrize("code", random_codes(3, 10, 5) + [gray(2), binary(2)])
def test_power_one_reduces_to_b(code):
    assert encode_b_power(code, 1).op == encode_b_ketbra(code).op
    assert (encode_b_power(code, 1).op - encode_b(code).op).simplify() == PauliSum(code.n)


def test_b_squared_binary_four_levels():
    expected = np.zeros((4, 4))
    expected[0, 2] = S2
    expected[1, 3] = math.sqrt(6)
    np.testing.assert_allclose(to_matrix(encode_b_power(binary(2), 2).op), expected, atol=1e-14)


def test_power_range_checked():
    with pytest.raises(ValueError):
        encode_b_power(gray(2), 4)
    with pytest.raises(ValueError):
        encode_b_power(gray(2), 0)


def test_ladder_weight_no_overflow():
    assert ladder_weight(3, 2) == pytest.approx(math.sqrt(20))
    big = ladder_weight(4000, 95)
    assert math.isfinite(big)
    assert math.log(big) == pytest.approx(0.5 * sum(math.log(v) for v in range(4001, 4096)), rel=1e-12)


@pytest.mark.parametrize("n", range(2, 6))
def test_gray_b2_count_matches_dense_decomposition(n):
    code = gray(n)
    dense = conjugated_fock(code, 2)
    assert term_count(encode_b_power(code, 2)) == len(from_matrix(dense))


def test_gray_b2_counts_golden():
    counts = [term_count(encode_b_power(gray(n), 2)) for n in range(2, 9)]
    assert counts == [4, 16, 48, 128, 320, 768, 1792]


def test_even_b2_gray_two():
    expected = {
        "IX": (S2 + S30) / 4,
        "XI": S12 / 4,
        "IY": 1j * (S2 - S30) / 4,
        "YI": 1j * S12 / 4,
        "ZX": (S2 - S30) / 4,
        "ZY": 1j * (S2 + S30) / 4,
        "XZ": -S12 / 4,
        "YZ": -1j * S12 / 4,
    }
    e = encode_even_b2(2, gray(2))
    assert_weights(e.op, expected)
    assert e.photon_of_index == (0, 2, 4, 6)
    assert e.max_photon == 6


def test_even_b2_matrix():
    expected = np.zeros((4, 4))
    expected[0b00, 0b01] = math.sqrt(2 * 1)
    expected[0b01, 0b11] = math.sqrt(4 * 3)
    expected[0b11, 0b10] = math.sqrt(6 * 5)
    np.testing.assert_allclose(to_matrix(encode_even_b2(2).op), expected, atol=1e-14)


def test_even_b2_single_qubit():
    assert_weights(encode_even_b2(1, Code([0, 1])).op, {"X": S2 / 2, "Y": 1j * S2 / 2})


def test_even_b2_matches_conjugated_fock_for_other_codes():
    for code in random_codes(3, 5, 8):
        photons = [2 * i for i in range(8)]
        np.testing.assert_allclose(
            to_matrix(encode_even_b2(3, code).op), conjugated_fock(code, 2, photons), atol=1e-12
        )


def test_even_b2_code_size_checked():
    with pytest.raises(ValueError):
        encode_even_b2(3, gray(2))


def test_squeeze_hamiltonian_parts():
    phi = 0.3
    h_r, h_i = encode_squeeze_hamiltonian(phi)
    c, s = math.cos(phi), math.sin(phi)
    assert_weights(
        h_r,
        {
            "IY": c * (S30 - S2) / 4,
            "YI": -c * S12 / 4,
            "ZY": -c * (S30 + S2) / 4,
            "YZ": c * S12 / 4,
        },
    )
    assert_weights(
        h_i,
        {
            "IX": s * (S30 + S2) / 4,
            "XI": s * S12 / 4,
            "ZX": -s * (S30 - S2) / 4,
            "XZ": -s * S12 / 4,
        },
    )
    assert h_r.is_hermitian() and h_i.is_hermitian()


def test_table_one_histogram():
    assert term_histogram(3) == Counter({24: 4032, 32: 14784, 40: 14784, 48: 6720})


def test_histogram_two_qubits_by_direct_counting():
    direct = Counter(term_count(encode_b(Code(w))) for w in iter_codes(2))
    assert term_histogram(2) == direct


def test_three_fold_not_worse_than_gray_for_cube():
    res = find_kfold(3, 3, node_budget=None)
    assert term_count(encode_b_power(res.code, 3)) <= term_count(encode_b_power(gray(3), 3))


def test_structured_equals_ketbra_all_two_qubit_codes():
    for words in iter_codes(2):
        c = Code(words)
        a, b = encode_b(c).op, encode_b_ketbra(c).op
        assert set(a.weights()) == set(b.weights())
        for t in a.terms:
            assert abs(t.coeff - b.coeff(*t.key)) <= 1e-12


def test_structured_equals_ketbra_random_three_qubit_codes():
    for c in random_codes(3, 200, 1):
        a, b = encode_b(c).op, encode_b_ketbra(c).op
        assert (a - b).simplify(1e-12) == PauliSum(3)
        assert len(a) == len(b)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_b_is_permutation_conjugated_fock_matrix(n):
    for c in random_codes(n, 20, n):
        np.testing.assert_allclose(to_matrix(encode_b(c).op), conjugated_fock(c), atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("xi", [0, 1, 2])
def test_gray_power_of_two_not_worse_than_unit_distance_sample(n, xi):
    k = 1 << xi
    if k >= 1 << n:
        pytest.skip("power exceeds the truncation")
    rng = np.random.default_rng(100 * n + xi)
    worst = max(term_count(encode_b_power(random_unit_distance(n, rng), k)) for _ in range(50))
    assert term_count(encode_b_power(gray(n), k)) <= worst


def test_minimal_codes_use_n_distinct_flips():
    codes = np.array(list(iter_codes(3)))
    weights = np.array([ladder_weight(i, 1) for i in range(7)])
    counts = (np.abs(_batch_tables(codes, 1, weights)) > 1e-12).sum(axis=(1, 2))
    minimal = codes[counts == 24]
    assert len(minimal) == 4032
    for c in minimal:
        assert len({int(a ^ b) for a, b in zip(c, c[1:])}) == 3
    # every unit-distance code attains the minimum, but most minimal codes are not unit distance
    unit = [c for c in codes if is_unit_distance(c)]
    assert all(counts[i] == 24 for i, c in enumerate(codes) if is_unit_distance(c))
    assert len(unit) == 144 < len(minimal)
