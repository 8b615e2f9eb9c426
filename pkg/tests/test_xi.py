import mpmath as mp
import numpy as np
import pytest

from kapitza_dirac.xi import (ETA_B_GUARD, XiUnderflow, phase_factor, xi, xi_closed,
                              xi_quadrature)

T = 1000.0


def xi_reference(a, b, T, dps=40):
    """Eight-term closed form in arbitrary precision."""
    with mp.workdps(dps):
        a, b, T = mp.mpf(a), mp.mpf(b), mp.mpf(T)
        W2 = 2 * mp.pi / T
        P = lambda X: (mp.exp(1j * X * T) - 1) / (1j * X) if X != 0 else T
        weight = {0: mp.mpf(1) / 2, 1: -mp.mpf(1) / 4, -1: -mp.mpf(1) / 4}
        total = 0
        for p in (-1, 0, 1):
            for q in (-1, 0, 1):
                A, B = a + p * W2, b + q * W2
                total += weight[p] * weight[q] * (P(A + B) - P(A)) / (1j * B)
        return complex(total)


def test_phase_factor_examples():
    assert phase_factor(0.0, T) == T
    assert abs(phase_factor(2 * np.pi / T, T)) < 1e-12
    assert phase_factor(1e-12, T) == pytest.approx(T + 0.5j * 1e-12 * T * T)
    x = 0.0123
    expected = (np.exp(1j * x * T) - 1) / (1j * x)
    assert phase_factor(x, T) == pytest.approx(expected, rel=1e-13)


def test_phase_factor_continuous_at_threshold():
    for x in (4.59e-10, 4.61e-10):
        exact = complex(mp.expm1(1j * mp.mpf(x) * T) / (1j * mp.mpf(x)))
        assert abs(phase_factor(x, T) - exact) < 1e-12 * T


def test_resonant_value():
    assert xi_closed(0.0, 1.0, T) == pytest.approx(xi_reference(0.0, 1.0, T), rel=1e-9)
    assert xi(0.0, 0.0, T) == pytest.approx(T * T / 8, rel=1e-9)


@pytest.mark.parametrize("a,b", [(0.3, -0.3), (0.0, 0.2), (1e-12, 0.5), (0.00628, 0.3),
                                 (0.5, 1e-5), (0.2, -0.2 + 2 * np.pi / T), (-0.9, 0.71)])
def test_closed_against_high_precision(a, b):
    ref = xi_reference(a, b, T)
    assert abs(xi_closed(a, b, T) - ref) <= 1e-9 * abs(ref)


def test_quadrature_against_high_precision():
    for a, b in [(0.654, 0.906), (-0.3, 0.05), (0.01, -0.02)]:
        ref = xi_reference(a, b, T)
        assert abs(xi_quadrature(a, b, T) - ref) <= 1e-8 * abs(ref)


def test_guard_raises_and_nan_mode():
    with pytest.raises(XiUnderflow):
        xi_closed(0.3, 0.5 * ETA_B_GUARD, T)
    with pytest.raises(XiUnderflow):
        xi_closed(0.3, 2 * np.pi / T, T)
    out = xi_closed(np.array([0.3, 0.3]), np.array([0.0, 0.4]), T, on_underflow="nan")
    assert np.isnan(out[0]) and np.isfinite(out[1])


def test_continuity_across_guard():
    # just inside the guard the dispatcher uses quadrature, just outside the
    # closed form; both must track the high-precision reference
    for b in (1e-8, -1e-8, 0.99 * ETA_B_GUARD, 1.01 * ETA_B_GUARD, -1.01 * ETA_B_GUARD):
        ref = xi_reference(0.2, b, T)
        assert abs(xi(0.2, b, T) - ref) < 1e-6 * abs(ref)


def test_broadcasting():
    a = np.linspace(-1, 1, 6)
    out = xi_closed(a[:, None], a[None, :] + 0.013, T)
    assert out.shape == (6, 6)
    assert out[2, 3] == pytest.approx(xi_closed(a[2], a[3] + 0.013, T))
