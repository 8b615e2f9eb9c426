"""Second-order perturbative propagation of a momentum eigenstate.

For an initial positive-energy state at ``kappa`` (grid point a = b = 0) the
final coefficient at ``kappa'' + (a'' dkx, b'' dky)`` collects every path

    (a1, b1) -> intermediate (a' = a1, b' = b1) -> final (a1 + a2, b1 + b2)

over polarizations j1, j2, intermediate energy sign and spin, and photon
index o (with o' = -o, d = -o, d' = o). Each path contributes

    -(NxNy)^-1 [u''^+ a_j2 u'] [u'^+ a_j1 u] A'_j2(a2, b2) A'_j1(a1, b1) Xi

where the leading minus sign is (-i)^2 and the charge is folded into A'.

Work is split into rows of fixed ``a1``. Each row produces its own partial
grid and the partials are merged by a pairwise reduction in row order, so
the result is bit-identical for any number of workers.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .beam import BeamParams, VertexFields
from .dirac import ALPHA, bispinors, energy
from .grid import GridSpec, MomentumOffset, momentum_points
from .xi import xi_closed, xi_quadrature

log = logging.getLogger(__name__)

# elements per vectorized block, bounds peak memory
_BLOCK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class Scenario:
    """Grid, beam and momentum offsets of one simulation."""

    spec: GridSpec
    beam: BeamParams
    kappa: MomentumOffset
    kappa1: MomentumOffset
    kappa2: MomentumOffset
    K: MomentumOffset
    compute_negative_final: bool = False

    def __post_init__(self):
        for lhs, rhs in ((self.kappa1 - self.kappa, self.K), (self.kappa2 - self.kappa1, self.K)):
            if not np.allclose(lhs.as_array(), rhs.as_array(), rtol=0, atol=1e-14):
                raise ValueError("momentum offsets must be chained by the field offset K")

    @property
    def final_gammas(self) -> tuple[int, ...]:
        return (1, -1) if self.compute_negative_final else (1,)

    @property
    def final_shape(self) -> tuple[int, int]:
        return (2 * self.spec.n_x - 1, 2 * self.spec.n_y - 1)


@dataclass(frozen=True)
class ChannelKey:
    a1: int
    b1: int
    a2: int
    b2: int
    j1: int
    j2: int
    gamma1: int
    s1: int
    o: int


@dataclass(frozen=True)
class XiInputs:
    eta_A: float
    eta_B: float
    T: float

    @property
    def Omega(self) -> float:
        return np.pi / self.T


@dataclass
class AmplitudeGrid:
    """Final-state coefficients, one table per initial spin.

    ``per_initial_spin[s]`` has shape ``(2n_x - 1, 2n_y - 1, n_gamma, 2)``
    over ``(a'', b'', gamma'', s'')`` with ``gammas`` listing the gamma''
    axis.
    """

    per_initial_spin: np.ndarray
    gammas: tuple[int, ...]
    offset: MomentumOffset
    iterations: int = 0
    guard_activations: int = 0
    channel_totals: dict[int, float] = field(default_factory=dict)

    def combine(self, initial) -> np.ndarray:
        """Coefficients for the initial spin mix ``initial = (c_0, c_1)``."""
        c = np.asarray(initial, dtype=complex)
        return np.tensordot(c, self.per_initial_spin, axes=(0, 0))

    def gamma_index(self, gamma: int) -> int:
        return self.gammas.index(gamma)


def detunings(key: ChannelKey, scenario: Scenario, gamma2: int = 1) -> XiInputs:
    """Detunings of one path for an initial state at ``kappa`` (a = b = 0, gamma = +1)."""
    spec, beam = scenario.spec, scenario.beam
    k0 = scenario.kappa.as_array()
    k1 = scenario.kappa1.as_array() + np.array([key.a1 * spec.dkx, key.b1 * spec.dky])
    k2 = scenario.kappa2.as_array() + np.array([(key.a1 + key.a2) * spec.dkx,
                                                (key.b1 + key.b2) * spec.dky])
    E0, E1, E2 = energy(k0), energy(k1), energy(k2)
    o2 = -key.o
    eta_A = gamma2 * E2 - key.gamma1 * E1 + o2 * beam.omega
    eta_B = key.gamma1 * E1 - E0 + key.o * beam.omega
    return XiInputs(float(eta_A), float(eta_B), beam.T)


class _Context:
    """Tables shared read-only by every row task."""

    def __init__(self, scenario: Scenario, vertices: VertexFields, breakdown: bool):
        spec = scenario.spec
        self.scenario = scenario
        self.breakdown = breakdown
        self.n_x, self.n_y = spec.n_x, spec.n_y
        self.T = scenario.beam.T
        self.omega = scenario.beam.omega
        self.gammas = scenario.final_gammas
        g_idx = [(1, -1).index(g) for g in self.gammas]

        self.E0 = float(energy(scenario.kappa.as_array()))
        self.u0 = bispinors(scenario.kappa.as_array())[0]                  # (s, 4)
        k1 = momentum_points(spec, scenario.kappa1)
        self.E1 = energy(k1)                                               # (a1, b1)
        self.U1 = bispinors(k1)                                            # (a1, b1, g, s', 4)
        k2 = momentum_points_final(spec, scenario.kappa2)
        self.E2 = energy(k2)
        U2 = bispinors(k2)[:, :, g_idx]                                    # (A, B, G, S, 4)
        # u''^+ alpha_j for j = x, y: (A, B, G, S, j, 4)
        self.L2 = np.einsum("abgsk,jkl->abgsjl", U2.conj(), ALPHA[:2])
        # first-vertex sandwich u'^+ alpha_j u: (a1, b1, g, s', j, s)
        self.S1 = np.einsum("abgsk,jkl,tl->abgsjt", self.U1.conj(), ALPHA[:2], self.u0)
        # vertex tables indexed by photon index of the first vertex, o in (-1, +1)
        self.first = np.stack([vertices.for_photon(o) for o in (-1, 1)])   # (o, j, a, b)
        self.second = np.stack([vertices.for_photon(-o) for o in (-1, 1)])
        self.o = np.array([-1.0, 1.0])
        self.gam = np.array([1.0, -1.0])
        self.gam2 = np.array(self.gammas, dtype=float)
        self.norm = -1.0 / (spec.n_x * spec.n_y)


def momentum_points_final(spec: GridSpec, offset: MomentumOffset) -> np.ndarray:
    """Wave vectors of the ``(2n_x - 1, 2n_y - 1)`` final-state grid."""
    kx = offset.kappa_x + np.arange(2 * spec.n_x - 1) * spec.dkx
    ky = offset.kappa_y + np.arange(2 * spec.n_y - 1) * spec.dky
    KX, KY = np.meshgrid(kx, ky, indexing="ij")
    return np.stack([KX, KY], axis=-1)


def _xi_block(ctx: _Context, eta_A: np.ndarray, eta_B: np.ndarray):
    values = xi_closed(eta_A, eta_B, ctx.T, on_underflow="nan")
    bad = np.isnan(values)
    n_bad = int(bad.sum())
    if n_bad:
        for idx in zip(*np.nonzero(bad)):
            values[idx] = xi_quadrature(float(eta_A[idx]), float(eta_B[idx]), ctx.T)
    return values, n_bad


def _row(ctx: _Context, a1: int):
    """Partial final grid from all paths through intermediate column ``a1``."""
    nx, ny = ctx.n_x, ctx.n_y
    nG = len(ctx.gammas)
    partial = np.zeros((2, 2 * nx - 1, 2 * ny - 1, nG, 2), dtype=complex)
    totals = np.zeros(2)
    guards = 0
    count = 0

    per_b1 = nx * ny * nG * 2 * 2 * 2 * 2 * 2
    block = max(1, _BLOCK_ELEMENTS // per_b1)
    a2 = np.arange(nx)
    b2 = np.arange(ny)
    for start in range(0, ny, block):
        b1 = np.arange(start, min(start + block, ny))
        # second-vertex sandwich u''^+ alpha_j2 u': (c, a2, b2, G, S, j2, g, s')
        L2 = ctx.L2[a1 + a2][:, b1[:, None] + b2]                     # (a2, c, b2, G, S, j, 4)
        V2 = np.einsum("xcygsjk,cdtk->cxygsjdt", L2, ctx.U1[a1, b1])
        # second vertex weighted by its field: (c, a2, b2, G, S, g, s', o)
        W2 = np.einsum("cxyGSjgt,ojxy->cxyGSgto", V2, ctx.second)
        # first vertex: (c, g, s', o, s)
        F1 = ctx.first[:, :, a1, b1]                                   # (o, j, c)
        M1 = np.einsum("cgtjs,ojc->cgtos", ctx.S1[a1, b1], F1)

        E1 = ctx.E1[a1, b1]                                            # (c,)
        E2 = ctx.E2[a1 + a2][:, b1[:, None] + b2].transpose(1, 0, 2)   # (c, a2, b2)
        # eta axes: (c, a2, b2, G, g, o)
        gE1 = ctx.gam[None, :] * E1[:, None]                           # (c, g)
        eta_B = gE1[:, :, None] - ctx.E0 + ctx.o * ctx.omega           # (c, g, o)
        eta_A = (ctx.gam2[None, None, None, :, None, None] * E2[..., None, None, None]
                 - gE1[:, None, None, None, :, None]
                 - ctx.o * ctx.omega)
        eta_Bb = np.broadcast_to(eta_B[:, None, None, None, :, :], eta_A.shape)
        Xi, n_bad = _xi_block(ctx, eta_A, eta_Bb)
        guards += n_bad

        # (c, a2, b2, G, S, s) summed over g, s', o
        amp = ctx.norm * np.einsum("cxyGSgto,cgtos,cxyGgo->scxyGS", W2, M1, Xi)
        for i, b in enumerate(b1):
            partial[:, a1:a1 + nx, b:b + ny] += amp[:, i]
        count += len(b1) * per_b1 * 2 * 2

        if ctx.breakdown:
            P2 = np.einsum("cxyGSjgt,ojxy->cxyGSgto", np.abs(V2) ** 2, np.abs(ctx.second) ** 2)
            P1 = np.einsum("cgtjs,ojc->cgtos", np.abs(ctx.S1[a1, b1]) ** 2, np.abs(F1) ** 2)
            g0 = ctx.gammas.index(1)
            w = np.einsum("cxySgto,cgtos,cxygo->g", P2[:, :, :, g0], P1 * 0.5,
                          np.abs(Xi[:, :, :, g0]) ** 2)
            totals += w * ctx.norm ** 2
    return partial, totals, guards, count


_WORKER_CTX: _Context | None = None


def _init_worker(ctx: _Context):
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _row_in_worker(a1: int):
    return _row(_WORKER_CTX, a1)


def _pairwise_sum(parts: list[np.ndarray]) -> np.ndarray:
    while len(parts) > 1:
        merged = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            merged.append(parts[-1])
        parts = merged
    return parts[0]


def accumulate(scenario: Scenario, vertices: VertexFields, *, workers: int = 1,
               breakdown: bool = True) -> AmplitudeGrid:
    """Sum every second-order path into the final amplitude grid.

    ``workers <= 1`` runs in-process; otherwise rows are distributed over a
    process pool. The row partition and reduction order are fixed, so both
    modes give identical bits.
    """
    ctx = _Context(scenario, vertices, breakdown)
    rows = range(scenario.spec.n_x)
    if workers <= 1:
        results = [_row(ctx, a1) for a1 in rows]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(ctx,)) as pool:
            results = list(pool.map(_row_in_worker, rows))

    grid = _pairwise_sum([r[0] for r in results])
    totals = _pairwise_sum([r[1] for r in results])
    guards = sum(r[2] for r in results)
    count = sum(r[3] for r in results)
    if guards:
        log.warning("eta_B guard triggered %d times; quadrature fallback used", guards)
    return AmplitudeGrid(
        per_initial_spin=grid,
        gammas=scenario.final_gammas,
        offset=scenario.kappa2,
        iterations=count,
        guard_activations=guards,
        channel_totals={1: float(totals[0]), -1: float(totals[1])} if breakdown else {},
    )


def channel_breakdown(scenario: Scenario, vertices: VertexFields, *,
                      workers: int = 1) -> tuple[float, float]:
    """Incoherent sums of |path|^2 for intermediate gamma' = +1 and -1.

    Paths are resolved down to (a1, b1, a2, b2, j1, j2, gamma', s', o, s, s'')
    with gamma'' = +1 and the x-polarized initial spin weights.
    """
    grid = accumulate(scenario, vertices, workers=workers, breakdown=True)
    return grid.channel_totals[1], grid.channel_totals[-1]
