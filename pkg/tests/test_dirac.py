import numpy as np
import pytest

from kapitza_dirac.dirac import (ALPHA, BETA, bispinor, bispinors, energy, hamiltonian,
                                 initial_x_polarized, project_x, sandwich)


def random_k(rng, n):
    r = 2 * np.sqrt(rng.uniform(size=n))
    phi = rng.uniform(0, 2 * np.pi, size=n)
    return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=-1)


def test_matrix_algebra():
    for i in range(3):
        assert np.allclose(ALPHA[i] @ ALPHA[i], np.eye(4))
        assert np.allclose(ALPHA[i] @ BETA + BETA @ ALPHA[i], 0)
        for j in range(i):
            assert np.allclose(ALPHA[i] @ ALPHA[j] + ALPHA[j] @ ALPHA[i], 0)


def test_rest_frame_spinors():
    u = bispinors(np.zeros(2))
    np.testing.assert_allclose(u.reshape(4, 4), np.eye(4), atol=1e-15)


def test_energy_values():
    assert energy(np.array([0.0, 0.0])) == 1.0
    assert energy(np.array([-0.1, 1.0])) == pytest.approx(np.sqrt(2.01))


def test_bispinor_suite(rng):
    for k in random_k(rng, 100):
        u = bispinors(k).reshape(4, 4)
        assert np.abs(u.conj() @ u.T - np.eye(4)).max() < 1e-12
        assert np.abs(u.T @ u.conj() - np.eye(4)).max() < 1e-12
        H = hamiltonian(k)
        E = energy(k)
        for idx, gamma in enumerate((1, 1, -1, -1)):
            assert np.abs(H @ u[idx] - gamma * E * u[idx]).max() < 1e-12


def test_sandwich_and_labels():
    k = np.array([0.3, -0.2])
    assert sandwich(k, 1, 0, 1, k, 1, 0) == pytest.approx(
        bispinor(k, 1, 0).conj() @ ALPHA[0] @ bispinor(k, 1, 0))
    with pytest.raises(ValueError):
        sandwich(k, 1, 0, 3, k, 1, 0)
    with pytest.raises(ValueError):
        bispinor(k, 0, 0)


def test_velocity_expectation():
    # <u|alpha|u> equals the group velocity k/E for positive energy
    k = np.array([0.4, 0.9])
    E = energy(k)
    assert sandwich(k, 1, 0, 1, k, 1, 0).real == pytest.approx(k[0] / E)
    assert sandwich(k, 1, 1, 2, k, 1, 1).real == pytest.approx(k[1] / E)


def test_x_projection_preserves_probability(rng):
    c = rng.normal(size=(2, 50)) + 1j * rng.normal(size=(2, 50))
    up, down = project_x(c[0], c[1])
    np.testing.assert_allclose(abs(up) ** 2 + abs(down) ** 2, abs(c[0]) ** 2 + abs(c[1]) ** 2,
                               rtol=1e-12)
    up, down = project_x(*initial_x_polarized())
    assert up == pytest.approx(1.0) and down == pytest.approx(0.0)
