import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import seeds
from qutritchip.errors import DimensionError
from qutritchip.qcore import (ALG_TOL, STRUCT_TOL, as_density, fidelity, fourier3, from_gell_mann,
                              gell_mann_coefficients, gell_mann_set, i_concurrence,
                              i_concurrence_lower_bound, is_density, is_unitary, ket,
                              max_entangled, partial_trace, projector, purity, random_density,
                              random_unitary, tensor, white_noise_for_fidelity, white_noise_state)

W = np.exp(2j * np.pi / 3)


def test_tensor_identity():
    assert np.allclose(tensor(np.eye(3), np.eye(3)), np.eye(9))


def test_tensor_fourier_matches_explicit_9x9():
    f = np.array([[1, 1, 1], [1, W, W**2], [1, W**2, W]]) / np.sqrt(3)
    big = np.array([[f[a // 3, b // 3] * f[a % 3, b % 3] for b in range(9)] for a in range(9)])
    assert np.allclose(tensor(fourier3(), fourier3()), big, atol=1e-12)


@given(seeds)
def test_tensor_acts_factorwise(seed):
    rng = np.random.default_rng(seed)
    a, b = random_unitary(3, rng), random_unitary(3, rng)
    x, y = rng.normal(size=3) + 1j * rng.normal(size=3), rng.normal(size=3) + 1j * rng.normal(size=3)
    assert np.allclose(tensor(a, b) @ np.kron(x, y), np.kron(a @ x, b @ y), atol=1e-9)
    assert is_unitary(tensor(a, b))


def test_is_unitary_cases():
    assert is_unitary(np.eye(3))
    assert not is_unitary(np.diag([1, 1, 2]))
    assert is_unitary(fourier3())
    with pytest.raises(DimensionError):
        is_unitary(np.ones((2, 3)))


def test_gell_mann_structure():
    gm = gell_mann_set()
    assert len(gm) == 9 and np.allclose(gm[0], np.eye(3))
    for a in range(1, 9):
        assert np.allclose(gm[a], gm[a].conj().T)
        assert abs(np.trace(gm[a])) < ALG_TOL
        for b in range(1, 9):
            assert abs(np.trace(gm[a] @ gm[b]) - 2 * (a == b)) < ALG_TOL


@given(seeds)
def test_gell_mann_round_trip(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    h = m + m.conj().T
    assert np.max(np.abs(from_gell_mann(gell_mann_coefficients(h)) - h)) < 1e-12


def test_partial_trace_cases(rng):
    s, t = random_density(3, rng), random_density(3, rng)
    assert np.allclose(partial_trace(np.kron(s, t), 0), s)
    assert np.allclose(partial_trace(np.kron(s, t), "idler"), t)
    assert np.allclose(partial_trace(max_entangled(), 0), np.eye(3) / 3)


@given(seeds)
def test_partial_trace_is_density(seed):
    r = partial_trace(random_density(9, np.random.default_rng(seed)), 1)
    assert is_density(r)


def test_fidelity_cases():
    psi = max_entangled()
    assert fidelity(projector(psi), psi) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(np.eye(9) / 9, psi) == pytest.approx(1 / 9, abs=1e-12)
    p = white_noise_for_fidelity(0.9550)
    assert 1 - p == pytest.approx((0.9550 - 1 / 9) / (1 - 1 / 9), abs=1e-12)
    assert fidelity(white_noise_state(psi, p), psi) == pytest.approx(0.9550, abs=1e-12)


@given(seeds, st.floats(0, 1))
def test_fidelity_linear_in_rho(seed, p):
    rng = np.random.default_rng(seed)
    r1, r2 = random_density(9, rng), random_density(9, rng)
    psi = ket(rng.normal(size=9) + 1j * rng.normal(size=9))
    mix = fidelity(p * r1 + (1 - p) * r2, psi)
    assert mix == pytest.approx(p * fidelity(r1, psi) + (1 - p) * fidelity(r2, psi), abs=1e-12)


def test_i_concurrence_values():
    assert i_concurrence(np.kron([1, 0, 0], [0, 1, 0])) == pytest.approx(0, abs=1e-12)
    assert i_concurrence(max_entangled()) == pytest.approx(np.sqrt(4 / 3), abs=1e-12)
    v = np.zeros(9)
    v[[0, 4]] = 1 / np.sqrt(2)
    assert i_concurrence(v) == pytest.approx(1.0, abs=1e-12)


def test_i_concurrence_lower_bound():
    psi = max_entangled()
    assert i_concurrence_lower_bound(projector(psi)) == pytest.approx(i_concurrence(psi), abs=1e-12)
    assert i_concurrence_lower_bound(np.eye(9) / 9) == 0.0
    noisy = white_noise_state(psi, 0.2)
    assert 0 < i_concurrence_lower_bound(noisy) < i_concurrence(psi)


@given(seeds)
def test_norm_preserved_under_unitaries(seed):
    rng = np.random.default_rng(seed)
    v = ket(rng.normal(size=9) + 1j * rng.normal(size=9))
    for _ in range(200):
        v = random_unitary(9, rng) @ v
    assert abs(np.linalg.norm(v) - 1) < STRUCT_TOL


def test_density_checks():
    assert not is_density(np.diag([1.0, 1.0] + [0.0] * 7))
    assert not is_density(np.diag([1.5, -0.5] + [0.0] * 7))
    assert np.allclose(as_density(2 * max_entangled()), projector(max_entangled()))
    assert purity(np.eye(9) / 9) == pytest.approx(1 / 9)
