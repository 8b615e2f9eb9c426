"""The sin^2-enveloped double time integral

    Xi = int_0^T dt2 sin^2(W t2) e^{i eta_A t2} int_0^t2 dt1 sin^2(W t1) e^{i eta_B t1}

with ``W = pi/T``. ``xi_closed`` is the eight-term analytic result,
``xi_quadrature`` a nested Gauss-Legendre evaluation used as oracle and as
fallback where the closed form divides by a vanishing ``eta_B``-type detuning.
"""
from __future__ import annotations

import numpy as np

TAYLOR_THRESHOLD = 4.6e-10
ETA_B_GUARD = 1e-6


class XiUnderflow(ArithmeticError):
    """A closed-form denominator ``eta_B`` or ``eta_B +- 2W`` is below the guard."""


def phase_factor(X, T: float):
    """``int_0^T exp(i X t) dt``; second-order Taylor form for ``|X| < 4.6e-10``."""
    X = np.asarray(X, dtype=float)
    small = np.abs(X) < TAYLOR_THRESHOLD
    Xs = np.where(small, 1.0, X)
    # (e^{iXT} - 1)/(iX) without the cancellation in e^{iXT} - 1
    half = 0.5 * Xs * T
    exact = (np.sin(2.0 * half) + 2j * np.sin(half) ** 2) / Xs
    taylor = T + 0.5j * X * T * T
    out = np.where(small, taylor, exact)
    return out[()] if out.ndim == 0 else out


def _xi_eight_terms(eta_A, eta_B, T, i0, ip, im):
    W2 = 2.0 * np.pi / T
    zeta = eta_A + eta_B
    P = lambda X: phase_factor(X, T)
    return (P(zeta) * (i0 / 4 + im / 16 + ip / 16)
            - P(zeta + W2) * (i0 / 8 + ip / 8)
            - P(zeta - W2) * (i0 / 8 + im / 8)
            + P(zeta + 2 * W2) * (ip / 16)
            + P(zeta - 2 * W2) * (im / 16)
            - P(eta_A) * (i0 / 4 - im / 8 - ip / 8)
            + P(eta_A + W2) * (i0 / 8 - im / 16 - ip / 16)
            + P(eta_A - W2) * (i0 / 8 - im / 16 - ip / 16))


def _envelope_sum(X, delta):
    # 1/(2X) - 1/(4(X+delta)) - 1/(4(X-delta)), combined without cancellation
    return -delta * delta / (2.0 * X * (X - delta) * (X + delta))


def _expm1i(X, T):
    half = 0.5 * X * T
    return -2.0 * np.sin(half) ** 2 + 1j * np.sin(2.0 * half)


def _xi_regrouped(eta_A, eta_B, T):
    # exp(i(X + 2nW)T) = exp(iXT) since 2WT = 2pi, so the eight terms collapse
    # onto the two exponentials exp(i zeta T) and exp(i eta_A T)
    delta = 2.0 * np.pi / T
    zeta = eta_A + eta_B
    s_zeta = sum(w * _envelope_sum(zeta + q * delta, delta) / (eta_B + q * delta)
                 for q, w in ((-1, -0.25), (0, 0.5), (1, -0.25)))
    s_A = _envelope_sum(eta_A, delta) * _envelope_sum(eta_B, delta)
    return -_expm1i(zeta, T) * s_zeta + _expm1i(eta_A, T) * s_A


def xi_closed(eta_A, eta_B, T: float, *, on_underflow: str = "raise"):
    """Closed-form Xi; broadcasts over array inputs.

    Near a resonance of ``zeta`` or ``eta_A`` (within ``pi/(2T)`` of a pole
    of the envelope sums) the eight phase-factor terms are summed directly.
    Elsewhere the same expression is evaluated with the terms sharing an
    exponential grouped first, which avoids losing digits when Xi is many
    orders below the individual terms.

    With ``on_underflow="nan"`` guarded entries are returned as NaN instead
    of raising :class:`XiUnderflow`.
    """
    eta_A = np.asarray(eta_A, dtype=float)
    eta_B = np.asarray(eta_B, dtype=float)
    eta_A, eta_B = np.broadcast_arrays(eta_A, eta_B)
    W2 = 2.0 * np.pi / T
    B0, Bp, Bm = eta_B, eta_B + W2, eta_B - W2
    guard = (np.abs(B0) < ETA_B_GUARD) | (np.abs(Bp) < ETA_B_GUARD) | (np.abs(Bm) < ETA_B_GUARD)
    if np.any(guard) and on_underflow == "raise":
        raise XiUnderflow(f"eta_B-type denominator below {ETA_B_GUARD}")
    B_safe = np.where(guard, 1.0, eta_B)
    inv = lambda b: 1.0 / (1j * b)
    i0, ip, im = inv(B_safe), inv(B_safe + W2), inv(B_safe - W2)

    zeta = eta_A + B_safe
    dist_zeta = np.min(np.abs(zeta[..., None] - W2 * np.arange(-2, 3)), axis=-1)
    dist_A = np.min(np.abs(eta_A[..., None] - W2 * np.arange(-1, 2)), axis=-1)
    near = (dist_zeta < 0.25 * W2) | (dist_A < 0.25 * W2)

    A_far = np.where(near, 0.5 * W2, eta_A)
    B_far = np.where(near, 1.5 * W2 + 1.0, B_safe)
    out = np.where(near, _xi_eight_terms(eta_A, B_safe, T, i0, ip, im),
                   _xi_regrouped(A_far, B_far, T))
    out = np.where(guard, np.nan + 0j, out)
    return out[()] if out.ndim == 0 else out


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}
_LD = np.longdouble
_LD_PI = _LD("3.14159265358979323846264338327950288")


def _gauss_legendre(n: int):
    """Nodes and weights on [-1, 1], Newton-refined to extended precision."""
    if n not in _GL_CACHE:
        x = np.polynomial.legendre.leggauss(n)[0].astype(_LD)
        for _ in range(3):
            p0, p1 = np.ones_like(x), x.copy()
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            x = x - p1 / dp
        w = 2 / ((1 - x * x) * dp * dp)
        _GL_CACHE[n] = (x, w, _integration_matrix(x, w))
    return _GL_CACHE[n]


def _legendre_table(x, m_max: int):
    P = [np.ones_like(x), x.copy()]
    for k in range(2, m_max + 1):
        P.append(((2 * k - 1) * x * P[-1] - (k - 1) * P[-2]) / k)
    return np.stack(P)


def _integration_matrix(x, w):
    """``S[k, l] = int_{-1}^{x_k} L_l``, ``L_l`` the Lagrange basis on the nodes."""
    n = len(x)
    P = _legendre_table(x, n)
    # int_{-1}^{x} P_m = (P_{m+1} - P_{m-1}) / (2m + 1), m >= 1
    Q = np.empty((n, n), dtype=x.dtype)
    Q[0] = x + 1
    for m in range(1, n):
        Q[m] = (P[m + 1] - P[m - 1]) / (2 * m + 1)
    coef = w[None, :] * (2 * np.arange(n)[:, None] + 1) / 2 * P[:n]   # (m, l)
    return Q.T @ coef


def _oscillation(eta, lo, offset):
    """``exp(i eta (lo + offset))`` with the large phase ``eta*lo`` formed exactly.

    ``eta`` is split into a 24-bit head, whose product with the dyadic panel
    starts fits the 64-bit extended mantissa, and a small tail.
    """
    head = _LD(np.float32(eta))
    tail = _LD(eta) - head
    big = head * lo
    small = tail * lo + _LD(eta) * offset
    return (np.cos(big) + 1j * np.sin(big)) * (np.cos(small) + 1j * np.sin(small))


def _xi_nested(eta_A: float, eta_B: float, T: float, panels: int, nodes: int):
    # extended precision: off resonance Xi sits ~12 orders below its summands
    x, w, S = _gauss_legendre(nodes)
    T = _LD(T)
    W = _LD_PI / T
    h = T / panels
    lo = (np.arange(panels, dtype=_LD) * h)[:, None]
    offset = 0.5 * h * (x + 1)
    # outer nodes per panel: (panels, nodes)
    envelope = np.sin(W * (lo + offset)) ** 2
    f_A = envelope * _oscillation(eta_A, lo, offset)
    f_B = envelope * _oscillation(eta_B, lo, offset)
    w_tau = 0.5 * h * w
    # inner integral over complete panels below each outer node
    full = (w_tau * f_B).sum(axis=1)
    below = np.concatenate([np.zeros(1, dtype=full.dtype), np.cumsum(full)[:-1]])
    # inner integral over [lo, tau] within the same panel, from the
    # interpolant through the panel's own nodes
    partial = 0.5 * h * (f_B @ S.T)
    inner = below[:, None] + partial
    terms = w_tau * f_A * inner
    return terms.sum(), np.abs(terms).sum()


def xi_quadrature(eta_A: float, eta_B: float, T: float, *, rtol: float = 1e-9,
                  nodes: int = 16, max_panels: int = 1 << 16) -> complex:
    """Nested Gauss-Legendre Xi; panels double until the change is below ``rtol``.

    Evaluated in extended precision. Far off resonance Xi can still sit
    below the rounding floor ``8 * eps * sum|summands|``; a change at that
    floor is accepted as converged.
    """
    freq = abs(eta_A) + abs(eta_B) + 4.0 * np.pi / T
    panels = 1 << max(3, int(np.ceil(np.log2(freq * T / 2.0))))
    prev, _ = _xi_nested(eta_A, eta_B, T, panels, nodes)
    eps = np.finfo(_LD).eps
    while panels < max_panels:
        panels *= 2
        cur, l1 = _xi_nested(eta_A, eta_B, T, panels, nodes)
        if abs(cur - prev) <= max(rtol * abs(cur), 8 * eps * l1):
            return complex(cur)
        prev = cur
    raise RuntimeError("xi quadrature did not converge")


def xi(eta_A: float, eta_B: float, T: float) -> complex:
    """Scalar Xi: closed form, quadrature where the closed form is guarded."""
    try:
        return complex(xi_closed(eta_A, eta_B, T))
    except XiUnderflow:
        return xi_quadrature(eta_A, eta_B, T)
