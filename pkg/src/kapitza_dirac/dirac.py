"""Free Dirac plane-wave solutions in two dimensions (hbar = m = c = 1).

Dirac representation: ``alpha_i`` carries ``sigma_i`` in its off-diagonal
blocks, ``beta = diag(1, 1, -1, -1)``. The third wave-vector component is
always zero. Spin label ``s = 0`` uses ``chi = (1, 0)``, ``s = 1`` uses
``chi = (0, 1)``.
"""
from __future__ import annotations

import numpy as np

SQRT_HALF = 1.0 / np.sqrt(2.0)

SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def _alpha(sigma: np.ndarray) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    out[:2, 2:] = sigma
    out[2:, :2] = sigma
    return out


ALPHA = np.stack([_alpha(s) for s in SIGMA])
BETA = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)

GAMMAS = (1, -1)
SPINS = (0, 1)


def energy(k) -> np.ndarray | float:
    """Relativistic energy ``sqrt(1 + kx^2 + ky^2)``; ``k`` has trailing axis of length 2."""
    k = np.asarray(k, dtype=float)
    return np.sqrt(1.0 + k[..., 0] ** 2 + k[..., 1] ** 2)


def hamiltonian(k) -> np.ndarray:
    """Free Dirac coefficient matrix ``alpha . k + beta`` at one wave vector."""
    kx, ky = np.asarray(k, dtype=float)
    return ALPHA[0] * kx + ALPHA[1] * ky + BETA


def bispinors(k) -> np.ndarray:
    """Energy eigenspinors for every ``(gamma, s)`` on a table of wave vectors.

    Returns an array of shape ``k.shape[:-1] + (2, 2, 4)``: axis -3 is the
    energy sign in the order ``GAMMAS`` (+1, -1), axis -2 the spin index.
    """
    k = np.asarray(k, dtype=float)
    kx, ky = k[..., 0], k[..., 1]
    E = energy(k)
    norm = np.sqrt((E + 1.0) / (2.0 * E))
    # sigma.k chi / (E + 1) for chi = (1,0) and (0,1); k3 = 0
    sx = kx / (E + 1.0)
    sy = ky / (E + 1.0)
    zero = np.zeros_like(E)
    one = np.ones_like(E)
    # sigma.k (1,0) = (0, kx + i ky);  sigma.k (0,1) = (kx - i ky, 0)
    small = np.stack([
        np.stack([zero, sx + 1j * sy], axis=-1),
        np.stack([sx - 1j * sy, zero], axis=-1),
    ], axis=-2)
    chi = np.stack([
        np.stack([one, zero], axis=-1),
        np.stack([zero, one], axis=-1),
    ], axis=-2).astype(complex)
    pos = np.concatenate([chi, small], axis=-1)
    neg = np.concatenate([-small, chi], axis=-1)
    out = np.stack([pos, neg], axis=-3)
    return out * norm[..., None, None, None]


def bispinor(k, gamma: int, s: int) -> np.ndarray:
    if gamma not in GAMMAS or s not in SPINS:
        raise ValueError(f"invalid labels gamma={gamma}, s={s}")
    return bispinors(k)[GAMMAS.index(gamma), s]


def sandwich(k_out, gamma_out: int, s_out: int, j: int,
             k_in, gamma_in: int, s_in: int) -> complex:
    """``u_out^dagger alpha_j u_in`` for polarization ``j`` in {1, 2}."""
    if j not in (1, 2):
        raise ValueError("polarization index must be 1 (x) or 2 (y)")
    u_out = bispinor(k_out, gamma_out, s_out)
    u_in = bispinor(k_in, gamma_in, s_in)
    return complex(u_out.conj() @ ALPHA[j - 1] @ u_in)


def initial_x_polarized() -> tuple[complex, complex]:
    """Spin coefficients ``(c^{+1,0}, c^{+1,1})`` of the x-polarized initial state."""
    return (complex(SQRT_HALF), complex(SQRT_HALF))


def project_x(c_up, c_down):
    """Change from the z to the x spin quantization axis."""
    return ((c_up + c_down) * SQRT_HALF, (c_up - c_down) * SQRT_HALF)
