import numpy as np
import pytest

from kapitza_dirac.beam import (BeamParams, build_vertex_fields, potential_exponential,
                                vertex_offset, waist)
from kapitza_dirac.grid import make_grid, momentum_axes

LAM = 2 * np.pi / 0.1


def spec15():
    return make_grid(15, 15, -10 * LAM, -10 * LAM, 20 * LAM, 20 * LAM)


def test_derived_beam_quantities():
    p = BeamParams()
    assert p.w0 == pytest.approx(100.0)
    assert p.x_R == pytest.approx(500.0)
    assert p.omega == p.k_L
    assert p.Omega == pytest.approx(np.pi / 1000)
    assert waist(p.x_R, p) == pytest.approx(np.sqrt(2) * p.w0)
    with pytest.raises(ValueError):
        BeamParams(k_L=-1)


def test_longitudinal_vanishes_on_axis():
    p = BeamParams()
    x = np.linspace(-600, 600, 11)
    for d in (-1, 1):
        for o in (-1, 1):
            assert not np.any(potential_exponential("x", d, o, x, np.zeros_like(x), p))


def test_transverse_real_part_cancels_at_origin():
    p = BeamParams()
    total = sum(potential_exponential("y", 1, o, 0.0, 0.0, p) for o in (-1, 1))
    assert total.real == pytest.approx(0.0, abs=1e-15)


def test_invalid_labels():
    p = BeamParams()
    with pytest.raises(ValueError):
        potential_exponential("z", 1, 1, 0.0, 0.0, p)
    with pytest.raises(ValueError):
        potential_exponential("y", 0, 1, 0.0, 0.0, p)


def test_envelope_factor_is_optional():
    p = BeamParams()
    a = potential_exponential("y", 1, -1, 10.0, 5.0, p, t=250.0, force_unit_envelope=False)
    b = potential_exponential("y", 1, -1, 10.0, 5.0, p, t=250.0)
    assert a == pytest.approx(b * np.sin(np.pi / 4) ** 2)


def test_vertex_tables_peak_at_laser_momentum():
    spec = spec15()
    p = BeamParams()
    vf = build_vertex_fields(spec, p)
    kx, ky = momentum_axes(spec, vertex_offset(spec, p))
    for d, o in ((1, -1), (-1, 1)):
        table = np.abs(vf.table("y", d, o))
        a, b = np.unravel_index(table.argmax(), table.shape)
        assert kx[a] == pytest.approx(p.k_L, abs=spec.dkx / 2)
        assert ky[b] == pytest.approx(0.0, abs=spec.dky / 2)
    assert vf.for_photon(1) is not None
    np.testing.assert_array_equal(vf.for_photon(1)[1], vf.table("y", -1, 1))
    with pytest.raises(ValueError):
        vf.tables[0, 0, 0, 0] = 0


def test_ablation_zeroes_longitudinal_tables():
    spec = spec15()
    vf = build_vertex_fields(spec, BeamParams(include_longitudinal=False))
    assert not np.any(vf.tables[:, 0])
    assert np.any(vf.tables[:, 1])


def test_linear_in_coupling():
    spec = spec15()
    a = build_vertex_fields(spec, BeamParams()).tables
    b = build_vertex_fields(spec, BeamParams(g0=3.0)).tables
    np.testing.assert_allclose(b, 3 * a, rtol=1e-13, atol=1e-15)
