"""Shifted position/momentum grids and the offset discrete Fourier transform.

Positions are ``x_m = x_min + m*dx`` and wave vectors ``k_a = kappa + a*dk``
with ``N*dx*dk = 2*pi`` along each axis. Offsets on either side enter the
transform only as row/column phases, so the transform is evaluated as two
separable direct sums instead of an FFT.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


class GridError(ValueError):
    """Invalid grid geometry."""


@dataclass(frozen=True)
class MomentumOffset:
    """Origin of a momentum grid, in units of mc/hbar."""

    kappa_x: float
    kappa_y: float

    def __post_init__(self):
        if not (np.isfinite(self.kappa_x) and np.isfinite(self.kappa_y)):
            raise GridError("momentum offset must be finite")

    def __add__(self, other: MomentumOffset) -> MomentumOffset:
        return MomentumOffset(self.kappa_x + other.kappa_x, self.kappa_y + other.kappa_y)

    def __sub__(self, other: MomentumOffset) -> MomentumOffset:
        return MomentumOffset(self.kappa_x - other.kappa_x, self.kappa_y - other.kappa_y)

    def as_array(self) -> np.ndarray:
        return np.array([self.kappa_x, self.kappa_y])


@dataclass(frozen=True)
class GridSpec:
    """Geometry of an ``n_x`` by ``n_y`` grid pair (lengths in hbar/(mc))."""

    n_x: int
    n_y: int
    x_min: float
    y_min: float
    dx: float
    dy: float
    dkx: float
    dky: float
    # even counts are only used for display grids, never for propagation
    odd_only: bool = True

    def __post_init__(self):
        for n in (self.n_x, self.n_y):
            if n < 3 or (self.odd_only and n % 2 == 0):
                raise GridError(f"grid counts must be odd and >= 3, got {n}")
        for n, d, dk in ((self.n_x, self.dx, self.dkx), (self.n_y, self.dy, self.dky)):
            if not (d > 0 and dk > 0):
                raise GridError("grid spacings must be positive")
            if abs(n * d * dk / TWO_PI - 1.0) > 1e-12:
                raise GridError("spacings violate N*dx*dk = 2*pi")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_x, self.n_y)

    @property
    def x_width(self) -> float:
        return self.dx * (self.n_x - 1)

    @property
    def y_width(self) -> float:
        return self.dy * (self.n_y - 1)

    @property
    def kx_width(self) -> float:
        return self.dkx * (self.n_x - 1)

    @property
    def ky_width(self) -> float:
        return self.dky * (self.n_y - 1)


def make_grid(n_x: int, n_y: int, x_min: float, y_min: float,
              x_width: float, y_width: float, *, odd_only: bool = True) -> GridSpec:
    """Build a grid with endpoint-inclusive spacing ``dx = x_width/(n_x - 1)``."""
    if int(n_x) != n_x or int(n_y) != n_y:
        raise GridError("grid counts must be integers")
    n_x, n_y = int(n_x), int(n_y)
    for n in (n_x, n_y):
        if n < 3 or (odd_only and n % 2 == 0):
            raise GridError(f"grid counts must be odd and >= 3, got {n}")
    if not (x_width > 0 and y_width > 0):
        raise GridError("box widths must be positive")
    dx = x_width / (n_x - 1)
    dy = y_width / (n_y - 1)
    return GridSpec(n_x=n_x, n_y=n_y, x_min=float(x_min), y_min=float(y_min),
                    dx=dx, dy=dy, dkx=TWO_PI / (n_x * dx), dky=TWO_PI / (n_y * dy),
                    odd_only=odd_only)


def position_axes(spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    return (spec.x_min + np.arange(spec.n_x) * spec.dx,
            spec.y_min + np.arange(spec.n_y) * spec.dy)


def momentum_axes(spec: GridSpec, offset: MomentumOffset) -> tuple[np.ndarray, np.ndarray]:
    return (offset.kappa_x + np.arange(spec.n_x) * spec.dkx,
            offset.kappa_y + np.arange(spec.n_y) * spec.dky)


def position_points(spec: GridSpec) -> np.ndarray:
    """Table of shape (n_x, n_y, 2) holding ``(x_m, y_n)``."""
    x, y = position_axes(spec)
    X, Y = np.meshgrid(x, y, indexing="ij")
    return np.stack([X, Y], axis=-1)


def momentum_points(spec: GridSpec, offset: MomentumOffset) -> np.ndarray:
    """Table of shape (n_x, n_y, 2) holding ``(k_xa, k_yb)``."""
    kx, ky = momentum_axes(spec, offset)
    KX, KY = np.meshgrid(kx, ky, indexing="ij")
    return np.stack([KX, KY], axis=-1)


def _kernels(spec: GridSpec, K: MomentumOffset, sign: float):
    x, y = position_axes(spec)
    kx, ky = momentum_axes(spec, K)
    ex = np.exp(sign * 1j * np.outer(x, kx)) / np.sqrt(spec.n_x)
    ey = np.exp(sign * 1j * np.outer(y, ky)) / np.sqrt(spec.n_y)
    return ex, ey


def _check_shape(values: np.ndarray, spec: GridSpec) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    if values.shape != spec.shape:
        raise GridError(f"field shape {values.shape} does not match grid {spec.shape}")
    return values


def dft_forward(values: np.ndarray, spec: GridSpec, K: MomentumOffset) -> np.ndarray:
    """Position-space table -> momentum-space table on the grid offset by ``K``.

    ``A'(k_ab) = (N_x N_y)^(-1/2) sum_mn A(x_mn) exp(-i x_mn . k_ab)``
    """
    values = _check_shape(values, spec)
    ex, ey = _kernels(spec, K, -1.0)
    return ex.T @ values @ ey


def dft_inverse(values: np.ndarray, spec: GridSpec, K: MomentumOffset) -> np.ndarray:
    """Exact inverse of :func:`dft_forward`."""
    values = _check_shape(values, spec)
    ex, ey = _kernels(spec, K, +1.0)
    return ex @ values @ ey.T


def dft_forward_naive(values: np.ndarray, spec: GridSpec, K: MomentumOffset) -> np.ndarray:
    """Full double-sum reference transform, O((N_x N_y)^2)."""
    values = _check_shape(values, spec)
    xs = position_points(spec).reshape(-1, 2)
    ks = momentum_points(spec, K).reshape(-1, 2)
    phase = np.exp(-1j * (xs @ ks.T))
    out = values.reshape(-1) @ phase / np.sqrt(spec.n_x * spec.n_y)
    return out.reshape(spec.shape)
