"""Gaussian-beam vector potential and its momentum-space vertex tables.

The beam propagates along x (direction ``d = +-1``) and is polarized along
y, with an epsilon-order longitudinal x component. Each trigonometric factor
is split into exponentials labelled by ``o = +-1``; the pair with ``o*d = -1``
peaks at ``+k_L e_x`` in momentum space and is the only one used as a vertex.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec, MomentumOffset, dft_forward, position_points

# (d, o) pairs with o*d = -1, in vertex-table order
VERTEX_PAIRS = ((1, -1), (-1, 1))
POLARIZATIONS = ("x", "y")


@dataclass(frozen=True)
class BeamParams:
    """Laser parameters in natural units.

    ``g0`` is the coupling q*A0 in units of mc^2; ``omega`` defaults to the
    vacuum dispersion ``k_L``.
    """

    g0: float = 1.0
    k_L: float = 0.1
    eps: float = 0.1
    T: float = 1000.0
    omega: float | None = None
    include_longitudinal: bool = True

    def __post_init__(self):
        if self.k_L <= 0 or self.eps <= 0 or self.T <= 0:
            raise ValueError("k_L, eps and T must be positive")
        if self.omega is None:
            object.__setattr__(self, "omega", self.k_L)

    @property
    def w0(self) -> float:
        return 1.0 / (self.k_L * self.eps)

    @property
    def x_R(self) -> float:
        return 0.5 * self.k_L * self.w0 ** 2

    @property
    def Omega(self) -> float:
        return np.pi / self.T


def waist(x, params: BeamParams):
    return params.w0 * np.sqrt(1.0 + (np.asarray(x) / params.x_R) ** 2)


def phase_G(x, y, t, d: int, params: BeamParams):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = waist(x, params)
    return (params.omega * t - d * params.k_L * x
            + np.arctan(d * x / params.x_R)
            - d * x * y ** 2 / (params.x_R * w ** 2))


def phase_G1(x, y, t, d: int, params: BeamParams):
    return phase_G(x, y, t, d, params) + np.arctan(d * np.asarray(x, dtype=float) / params.x_R)


def envelope(t, params: BeamParams):
    t = np.asarray(t, dtype=float)
    inside = (t >= 0) & (t <= params.T)
    return np.where(inside, np.sin(params.Omega * t) ** 2, 0.0)


def potential_exponential(j: str, d: int, o: int, x, y, params: BeamParams,
                          t: float = 0.0, force_unit_envelope: bool = True):
    """One exponential component ``A_{j,d,o}`` (already multiplied by the charge)."""
    if d not in (-1, 1) or o not in (-1, 1):
        raise ValueError("d and o must be +1 or -1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = waist(x, params)
    eta = 1.0 if force_unit_envelope else envelope(t, params)
    gauss = (params.w0 / w) * np.exp(-(y / w) ** 2)
    if j == "x":
        return (-d * params.g0 * params.eps * (y / w) * gauss
                * np.exp(1j * o * phase_G1(x, y, t, d, params)) * eta)
    if j == "y":
        return (1j * o * 0.5 * params.g0 * gauss
                * np.exp(1j * o * phase_G(x, y, t, d, params)) * eta)
    raise ValueError(f"polarization must be 'x' or 'y', got {j!r}")


def vertex_offset(spec: GridSpec, params: BeamParams) -> MomentumOffset:
    """Field-grid origin centred on the ``+k_L e_x`` peak."""
    return MomentumOffset(-0.5 * spec.kx_width + params.k_L, -0.5 * spec.ky_width)


@dataclass(frozen=True)
class VertexFields:
    """Momentum-space tables ``A'_{j,d,o}`` for the two admissible ``(d, o)`` pairs.

    ``tables[p, i]`` holds pair ``VERTEX_PAIRS[p]`` and polarization
    ``POLARIZATIONS[i]``, each of shape ``(n_x, n_y)``.
    """

    tables: np.ndarray
    K: MomentumOffset
    spec: GridSpec = field(repr=False)

    def table(self, j: str, d: int, o: int) -> np.ndarray:
        return self.tables[VERTEX_PAIRS.index((d, o)), POLARIZATIONS.index(j)]

    def for_photon(self, o: int) -> np.ndarray:
        """Both polarizations of the table used by a vertex with photon index ``o``."""
        return self.tables[VERTEX_PAIRS.index((-o, o))]


def build_vertex_fields(spec: GridSpec, params: BeamParams) -> VertexFields:
    pts = position_points(spec)
    x, y = pts[..., 0], pts[..., 1]
    K = vertex_offset(spec, params)
    tables = np.zeros((len(VERTEX_PAIRS), len(POLARIZATIONS)) + spec.shape, dtype=complex)
    for p, (d, o) in enumerate(VERTEX_PAIRS):
        for i, j in enumerate(POLARIZATIONS):
            if j == "x" and not params.include_longitudinal:
                continue
            field_xy = potential_exponential(j, d, o, x, y, params)
            tables[p, i] = dft_forward(field_xy, spec, K)
    tables.setflags(write=False)
    return VertexFields(tables=tables, K=K, spec=spec)
