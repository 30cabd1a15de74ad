import json
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from bosenc import fock
from bosenc.analysis import (
    MEASURED_BASES,
    DensityMatrix,
    coefficient_sigma,
    density_json,
    qubit_state_to_fock,
    qubit_to_fock,
    quadrature_covariance,
    reconstruct,
    squeezing_angle,
    state_fidelity,
    tomography_coeffs,
    wigner,
    wigner_csv,
)
from bosenc.encoder import encode_even_b2
from bosenc.sim import sample
from bosenc.vqs import run_evolution, squeeze_run

GRID = np.linspace(-5, 5, 201)
BELL = np.array([1, 0, 0, 1]) / math.sqrt(2)


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def wigner_oracle(rho, x, p):
    """(1/pi) tr[D(a)^dag rho D(a) Parity] with D from scipy's matrix exponential in a padded space."""
    dim = rho.shape[0]
    big = dim + 40
    b = np.diag(np.sqrt(np.arange(1, big)), 1)
    a = (x + 1j * p) / math.sqrt(2)
    # D(a)^dag = D(-a)
    d = scipy.linalg.expm(-a * b.T + np.conj(a) * b)[:, :dim]
    parity = np.diag((-1.0) ** np.arange(big))
    return float(np.trace(d @ rho @ d.conj().T @ parity).real / math.pi)


@pytest.fixture(scope="module")
def vqs_state():
    r = run_evolution(squeeze_run(t_final=0.5))
    return r.ansatz.state(r.thetas[-1], r.psi0), r.encoding


def test_ground_state_coefficients():
    c = tomography_coeffs(np.array([1, 0, 0, 0]))
    for label, val in c.items():
        assert val == pytest.approx(1.0 if set(label) <= {"I", "Z"} else 0.0, abs=1e-15)


def test_bell_coefficients():
    c = tomography_coeffs(BELL)
    expected = {"II": 1, "XX": 1, "YY": -1, "ZZ": 1}
    for label, val in c.items():
        assert val == pytest.approx(expected.get(label, 0.0), abs=1e-15)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_reconstruction_round_trip(seed):
    psi = random_state(np.random.default_rng(seed), 4)
    rho = reconstruct(tomography_coeffs(psi))
    np.testing.assert_allclose(rho.mat, np.outer(psi, psi.conj()), atol=1e-12)


def test_zero_coefficients_give_maximally_mixed():
    np.testing.assert_allclose(reconstruct({"II": 1.0}).mat, np.eye(4) / 4)


def test_reconstruct_requires_unit_trace():
    with pytest.raises(ValueError):
        reconstruct({"II": 0.5})


def shot_data(psi, shots, seed):
    return {b: sample(psi, b, shots, seed ^ j) for j, b in enumerate(MEASURED_BASES)}


def test_sampled_coefficients_within_binomial_band(vqs_state):
    psi, _ = vqs_state
    shots = 50_000
    exact = tomography_coeffs(psi)
    est = tomography_coeffs(shot_data(psi, shots, 21))
    for label, c in exact.items():
        if label == "II":
            continue
        # single-qubit terms pool three bases
        pooled = shots * (3 if "I" in label else 1)
        assert abs(est[label] - c) <= 5 * coefficient_sigma(c, pooled) + 1e-12, label


def test_missing_basis_rejected():
    data = shot_data(BELL, 10, 0)
    del data["XY"]
    with pytest.raises(ValueError):
        tomography_coeffs(data)


def test_sampled_reconstruction_fidelity(vqs_state):
    psi, _ = vqs_state
    target = np.zeros(4, dtype=complex)
    z = fock.exact_squeezed_state(0.5, math.pi / 2, 6).amps
    enc = encode_even_b2(2)
    for word, photons in zip(enc.code.words, enc.photon_of_index):
        target[word] = z[photons]
    rho = reconstruct(tomography_coeffs(shot_data(psi, 50_000, 3)))
    assert state_fidelity(rho, target) >= 0.98
    assert state_fidelity(rho.project_psd(), target) >= 0.98


def test_fidelity_basics():
    rng = np.random.default_rng(8)
    psi = random_state(rng, 4)
    assert state_fidelity(DensityMatrix.pure(psi), psi) == pytest.approx(1.0)
    mixed = DensityMatrix(2, np.eye(4) / 4)
    assert state_fidelity(mixed, psi) == pytest.approx(0.25)
    rho = DensityMatrix.pure(random_state(rng, 4))
    assert state_fidelity(rho, psi) == pytest.approx(np.vdot(psi, rho.mat @ psi).real)
    with pytest.raises(ValueError):
        state_fidelity(rho, psi[:2])


def test_psd_projection_idempotent_and_trace_preserving():
    rng = np.random.default_rng(9)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    herm = (a + a.conj().T) / 2
    herm += (1 - np.trace(herm).real) / 4 * np.eye(4)
    once = DensityMatrix(2, herm).project_psd()
    twice = once.project_psd()
    assert np.trace(once.mat).real == pytest.approx(1.0)
    assert once.eigenvalues().min() >= -1e-10
    np.testing.assert_allclose(twice.mat, once.mat, atol=1e-12)


def test_density_shape_checked():
    with pytest.raises(ValueError):
        DensityMatrix(2, np.eye(3))


def test_qubit_to_fock_even_gray():
    enc = encode_even_b2(2)
    vac = qubit_to_fock(np.diag([1, 0, 0, 0]).astype(complex), enc)
    assert vac.shape == (7, 7) and vac[0, 0] == 1 and np.count_nonzero(vac) == 1
    four = qubit_to_fock(np.diag([0, 0, 0, 1]).astype(complex), enc)
    assert four[4, 4] == 1 and np.count_nonzero(four) == 1
    rho = DensityMatrix.pure(random_state(np.random.default_rng(1), 4))
    assert np.trace(qubit_to_fock(rho, enc)).real == pytest.approx(1.0)


def test_state_and_density_mappings_agree():
    enc = encode_even_b2(2)
    psi = random_state(np.random.default_rng(2), 4)
    v = qubit_state_to_fock(psi, enc)
    np.testing.assert_allclose(qubit_to_fock(DensityMatrix.pure(psi), enc), np.outer(v, v.conj()), atol=1e-15)
    assert np.all(v[1::2] == 0)
    with pytest.raises(ValueError):
        qubit_state_to_fock(psi[:2], enc)


def test_vacuum_wigner():
    g = wigner([1, 0], GRID, GRID)
    c = len(GRID) // 2
    assert g.w[c, c] == pytest.approx(1 / math.pi, abs=1e-9)
    np.testing.assert_allclose(g.w, np.exp(-(GRID[None, :] ** 2) - GRID[:, None] ** 2) / math.pi, atol=1e-14)
    assert g.integral() == pytest.approx(1.0, abs=1e-3)


def test_wigner_matches_displacement_oracle():
    rng = np.random.default_rng(3)
    v = random_state(rng, 6)
    rho = np.outer(v, v.conj())
    xs = np.array([-1.3, 0.0, 0.4, 2.1])
    ps = np.array([-0.7, 0.2, 1.5])
    g = wigner(rho, xs, ps)
    for i, p in enumerate(ps):
        for j, x in enumerate(xs):
            assert g.w[i, j] == pytest.approx(wigner_oracle(rho, x, p), abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_even_states_have_parity_peak(seed):
    rng = np.random.default_rng(seed)
    v = np.zeros(12, dtype=complex)
    v[::2] = random_state(rng, 6)
    w = wigner(v, [0.0], [0.0]).w[0, 0]
    assert w == pytest.approx(1 / math.pi, abs=1e-9)


def test_truncated_squeezed_wigner_features():
    z = fock.exact_squeezed_state(0.5, math.pi / 2, 6)
    g = wigner(z.amps, GRID, GRID)
    assert g.integral() == pytest.approx(1.0, abs=1e-3)
    assert g.purity() == pytest.approx(1.0, abs=1e-3)
    assert g.w.min() < 0
    # squeezed along x = p, so the ridge runs along the anti-diagonal
    i = np.argmin(np.abs(GRID - 1.0))
    j = np.argmin(np.abs(GRID + 1.0))
    assert g.w[i, i] < g.w[j, i]


def test_full_reference_wigner_nonnegative():
    full = fock.squeezed_amplitudes(0.5, math.pi / 2, fock.REFERENCE_DIM - 2)
    g = wigner(full, GRID, GRID)
    assert g.w.min() >= -1e-6
    assert g.integral() == pytest.approx(1.0, abs=1e-3)


def test_covariance_vacuum():
    np.testing.assert_allclose(quadrature_covariance([1, 0, 0]), np.eye(2) / 2, atol=1e-15)


def test_covariance_full_squeezed_state():
    r = 0.5
    full = fock.squeezed_amplitudes(r, math.pi / 2, fock.REFERENCE_DIM - 2)
    vals = np.linalg.eigvalsh(quadrature_covariance(full))
    assert vals == pytest.approx([math.exp(-2 * r) / 2, math.exp(2 * r) / 2], rel=1e-8)


def test_covariance_truncated_state_close():
    z = fock.exact_squeezed_state(0.5, math.pi / 2, 6)
    low = np.linalg.eigvalsh(quadrature_covariance(z.amps))[0]
    # the six-photon truncation shifts the minimum variance by a few percent
    assert low == pytest.approx(math.exp(-1) / 2, rel=0.05)


@pytest.mark.parametrize("phi", [math.pi / 2, 0.6, -1.0])
def test_rotation_by_half_angle_diagonalizes(phi):
    full = fock.squeezed_amplitudes(0.5, phi, fock.REFERENCE_DIM - 2)
    cov = quadrature_covariance(full)
    a = phi / 2
    rot = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    diag = rot.T @ cov @ rot
    assert abs(diag[0, 1]) <= 1e-10
    assert diag[0, 0] == pytest.approx(math.exp(-1) / 2, rel=1e-8)
    assert squeezing_angle(cov) == pytest.approx(a, abs=1e-8)


def test_vqs_wigner_tilt(vqs_state):
    psi, enc = vqs_state
    cov = quadrature_covariance(qubit_state_to_fock(psi, enc))
    assert math.degrees(squeezing_angle(cov)) == pytest.approx(45.0, abs=0.5)


def test_wigner_csv_and_density_json():
    g = wigner([1, 0], [0.0, 1.0], [0.0])
    lines = wigner_csv(g).splitlines()
    assert lines[0] == "x,p,w" and len(lines) == 3
    doc = json.loads(density_json(DensityMatrix.pure(BELL), r=0.5))
    assert doc["r"] == 0.5
    assert doc["real"][0][3] == pytest.approx(0.5)
