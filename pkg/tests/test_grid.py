import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kapitza_dirac.grid import (GridError, GridSpec, MomentumOffset, dft_forward, dft_forward_naive,
                                dft_inverse, make_grid, momentum_axes, position_axes,
                                position_points, momentum_points)

LAM = 2 * np.pi / 0.1


def baseline():
    return make_grid(15, 15, -10 * LAM, -10 * LAM, 20 * LAM, 20 * LAM)


def test_position_axis_endpoints():
    spec = baseline()
    x, y = position_axes(spec)
    assert x[0] == -10 * LAM
    assert x[14] == pytest.approx(10 * LAM, rel=1e-14)
    assert x[7] == pytest.approx(0.0, abs=1e-12)


def test_spacing_and_fourier_condition():
    spec = make_grid(7, 9, 0.0, 1.0, 3.0, 5.0)
    assert spec.dx == pytest.approx(0.5)
    assert spec.dy == pytest.approx(5.0 / 8)
    assert spec.n_x * spec.dx * spec.dkx == pytest.approx(2 * np.pi, rel=1e-15)
    assert spec.kx_width == pytest.approx(spec.dkx * 6)


def test_momentum_axis_offset():
    spec = baseline()
    kx, ky = momentum_axes(spec, MomentumOffset(-0.1, 1.0))
    assert kx[0] == -0.1
    assert ky[3] == pytest.approx(1.0 + 3 * spec.dky)
    assert momentum_points(spec, MomentumOffset(0, 0)).shape == (15, 15, 2)
    assert position_points(spec).shape == (15, 15, 2)


@pytest.mark.parametrize("n", [2, 4, 1, 0, -3])
def test_invalid_counts(n):
    with pytest.raises(GridError):
        make_grid(n, 5, 0, 0, 1, 1)


def test_invalid_widths_and_inconsistent_spec():
    with pytest.raises(GridError):
        make_grid(5, 5, 0, 0, 0.0, 1.0)
    with pytest.raises(GridError):
        GridSpec(5, 5, 0, 0, 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(GridError):
        MomentumOffset(np.nan, 0.0)


def test_even_grid_only_when_requested():
    spec = make_grid(8, 4, 0, 0, 1, 1, odd_only=False)
    assert spec.shape == (8, 4)


@pytest.mark.parametrize("n_x,n_y", [(3, 3), (5, 7), (15, 15)])
def test_exponential_orthonormality(n_x, n_y):
    spec = make_grid(n_x, n_y, -3.3, 1.7, 12.0, 7.5)
    pts = position_points(spec).reshape(-1, 2)
    ks = momentum_points(spec, MomentumOffset(0.37, -1.2)).reshape(-1, 2)
    basis = np.exp(1j * pts @ ks.T) / np.sqrt(n_x * n_y)
    gram = basis.conj().T @ basis
    assert np.abs(gram - np.eye(n_x * n_y)).max() < 1e-12


def test_round_trip_and_naive(rng):
    spec = baseline()
    K = MomentumOffset(-0.03, -0.032)
    values = rng.normal(size=spec.shape) + 1j * rng.normal(size=spec.shape)
    forward = dft_forward(values, spec, K)
    assert np.abs(dft_inverse(forward, spec, K) - values).max() < 1e-12
    assert np.abs(forward - dft_forward_naive(values, spec, K)).max() < 1e-12


def test_shape_mismatch():
    with pytest.raises(GridError):
        dft_forward(np.zeros((3, 3)), baseline(), MomentumOffset(0, 0))


@settings(max_examples=25, deadline=None)
@given(shift=st.floats(-50, 50), kx=st.floats(-1, 1), ky=st.floats(-1, 1))
def test_position_offset_is_a_phase(shift, kx, ky):
    a = make_grid(5, 5, -2.0, -1.0, 4.0, 4.0)
    b = make_grid(5, 5, -2.0 + shift, -1.0, 4.0, 4.0)
    values = np.arange(25, dtype=complex).reshape(5, 5) ** 1.5
    K = MomentumOffset(kx, ky)
    fa = dft_forward(values, a, K)
    fb = dft_forward(values, b, K)
    kxs, _ = momentum_axes(a, K)
    np.testing.assert_allclose(fb, fa * np.exp(-1j * shift * kxs)[:, None], atol=1e-9)
