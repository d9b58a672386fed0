"""Characteristic structure of the multi-dimensional ultra-relativistic system.

The state is ``w = (w_1, ..., w_d, E)`` with momentum ``w_i = 4 p u_i g``,
energy ``E = p (3 + 4|u|^2)`` and ``g = sqrt(1 + |u|^2)``.  The flux in
direction ``n`` is

    f_n(w) = p n + w_n / (E + p) * wbar  (+ w_n in the energy slot).

:func:`eigen` returns the eigenvalues of ``df_n/dw`` together with right and
left eigenvector matrices expressed in an orthonormal frame ``{n, t_2..t_d}``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrameError, DomainError, InvalidStateError

__all__ = [
    "EigenDecomposition",
    "conserved_from_primitive",
    "primitive_from_conserved",
    "pressure_gradient",
    "flux",
    "normal_flux",
    "eigenvalues",
    "tangent_frame",
    "eigen",
    "numerical_jacobian",
]

GAP_TOL = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    """Columns of ``R`` and rows of ``L`` are ordered ``(-, 0 ... 0, +)``."""

    normal: np.ndarray
    tangents: np.ndarray
    eigenvalues: np.ndarray
    R: np.ndarray
    L: np.ndarray

    @property
    def lam_minus(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lam_zero(self) -> float:
        return float(self.eigenvalues[1]) if self.eigenvalues.size > 2 else float("nan")

    @property
    def lam_plus(self) -> float:
        return float(self.eigenvalues[-1])


def _as_state(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("w must be a vector of length d+1 >= 2")
    m2 = float(w[:-1] @ w[:-1])
    if not (np.all(np.isfinite(w)) and m2 < w[-1] * w[-1] and w[-1] > 0):
        raise InvalidStateError(f"state violates |wbar| < E: {w!r}")
    return w


def _as_normal(n, d: int) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n.shape != (d,):
        raise ValueError(f"normal must have length {d}")
    norm = np.linalg.norm(n)
    if norm == 0.0 or not np.isfinite(norm):
        raise DomainError("normal must be a non-zero finite vector")
    if abs(norm - 1.0) > 1e-12:
        raise DomainError(f"normal must have unit length, got |n| = {norm!r}")
    return n


def _pressure(w: np.ndarray) -> float:
    m2 = float(w[:-1] @ w[:-1])
    E = w[-1]
    return (E - np.sqrt(m2)) * (E + np.sqrt(m2)) / (E + np.sqrt(4.0 * E * E - 3.0 * m2))


def conserved_from_primitive(p: float, u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if not p > 0:
        raise InvalidStateError("pressure must be positive")
    u2 = float(u @ u)
    return np.append(4.0 * p * u * np.sqrt(1.0 + u2), p * (3.0 + 4.0 * u2))


def primitive_from_conserved(w) -> tuple[float, np.ndarray]:
    w = _as_state(w)
    p = _pressure(w)
    if not p > 0:
        raise InvalidStateError(f"pressure underflow for state {w!r}")
    return float(p), w[:-1] / np.sqrt(4.0 * p * (w[-1] + p))


def pressure_gradient(w) -> np.ndarray:
    """``dp/dw``: ``-w_j/(E+3p)`` for momenta, ``(E-p)/(E+3p)`` for energy."""
    w = _as_state(w)
    p = _pressure(w)
    E = w[-1]
    return np.append(-w[:-1] / (E + 3.0 * p), (E - p) / (E + 3.0 * p))


def normal_flux(w, n) -> np.ndarray:
    w = _as_state(w)
    n = _as_normal(n, w.size - 1)
    return _normal_flux_unchecked(w, n)


def _normal_flux_unchecked(w, n):
    p = _pressure(w)
    m = w[:-1]
    wn = float(m @ n)
    return np.append(p * n + m * wn / (w[-1] + p), wn)


def flux(w, k: int) -> np.ndarray:
    """Physical flux in coordinate direction ``k`` (1-based)."""
    w = _as_state(w)
    d = w.size - 1
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in 1..{d}")
    e = np.zeros(d)
    e[k - 1] = 1.0
    return _normal_flux_unchecked(w, e)


def eigenvalues(w, n) -> tuple[float, float, float]:
    """``(lam-, lam0, lam+)`` of the normal flux Jacobian."""
    w = _as_state(w)
    n = _as_normal(n, w.size - 1)
    p, u = primitive_from_conserved(w)
    return _eigenvalues(w, n, p, u)


def _eigenvalues(w, n, p, u):
    u2 = float(u @ u)
    un = float(u @ n)
    g = np.sqrt(1.0 + u2)
    root = np.sqrt(3.0 + 2.0 * (u2 - un * un))
    denom = 3.0 + 2.0 * u2
    lam0 = float(w[:-1] @ n) / (w[-1] + p)
    return (2.0 * un * g - root) / denom, lam0, (2.0 * un * g + root) / denom


def tangent_frame(n) -> np.ndarray:
    """Rows ``t_2..t_d`` completing ``n`` to an orthonormal basis.

    Coordinate axes are taken cyclically starting from the one least aligned
    with ``n`` and orthonormalised against ``n`` and each other.
    """
    n = np.asarray(n, dtype=float)
    d = n.size
    norm = np.linalg.norm(n)
    if norm == 0.0 or not np.isfinite(norm):
        raise DomainError("normal must be a non-zero finite vector")
    n = n / norm
    start = int(np.argmin(np.abs(n)))
    basis = [n]
    for k in range(d):
        if len(basis) == d:
            break
        e = np.zeros(d)
        e[(start + k) % d] = 1.0
        for b in basis:
            e = e - (e @ b) * b
        # second pass keeps orthogonality at round-off level
        for b in basis:
            e = e - (e @ b) * b
        size = np.linalg.norm(e)
        if size > 1e-8:
            basis.append(e / size)
    return np.array(basis[1:]).reshape(d - 1, d)


def eigen(w, n) -> EigenDecomposition:
    w = _as_state(w)
    d = w.size - 1
    n = _as_normal(n, d)
    p, u = primitive_from_conserved(w)
    m = w[:-1]
    E = w[-1]
    H = E + p
    lm, l0, lp = _eigenvalues(w, n, p, u)
    if min(l0 - lm, lp - l0) < GAP_TOL:
        raise DegenerateFrameError("characteristic speeds coalesce")

    T = tangent_frame(n)
    grad = pressure_gradient(w)
    dp_m, dp_E = grad[:-1], grad[-1]
    wn = float(m @ n)
    alpha = (T @ dp_m) / (dp_E + l0 * float(dp_m @ n))
    wt = T @ m
    scale = H / (H * H - wn * wn)
    a_m = scale * (1.0 - wn * lm / H)
    a_p = scale * (1.0 - wn * lp / H)

    def lift(v):
        return np.append(v, 0.0)

    e = np.zeros(d + 1)
    e[-1] = 1.0
    t1 = lift(n)
    Tl = np.array([lift(t) for t in T]).reshape(d - 1, d + 1)
    wt_vec = wt @ Tl if d > 1 else np.zeros(d + 1)

    r_m = lm * t1 + a_m * wt_vec + e
    r_p = lp * t1 + a_p * wt_vec + e
    r0 = Tl - np.outer(alpha, e + l0 * t1)
    R = np.column_stack([r_m, *r0, r_p])

    S = float(alpha @ wt)
    D = (lm + a_m * l0 * S) * (1.0 + a_p * S) - (lp + a_p * l0 * S) * (1.0 + a_m * S)
    if abs(D) < GAP_TOL:
        raise DegenerateFrameError(f"left-eigenvector normalisation D = {D!r} vanishes")
    beta = a_p * (lm - l0) + a_m * (l0 - lp)
    ell_m = ((1.0 + a_p * S) * t1 + (alpha * (l0 - lp)) @ Tl - (a_p * l0 * S + lp) * e) / D
    ell_p = -((1.0 + a_m * S) * t1 + (alpha * (l0 - lm)) @ Tl - (a_m * l0 * S + lm) * e) / D
    ell0 = (
        np.outer(wt * (a_p - a_m), t1)
        - np.outer(wt * (a_p * lm - a_m * lp), e)
        + (D * np.eye(d - 1) - beta * np.outer(wt, alpha)) @ Tl
    ) / D
    L = np.vstack([ell_m, *ell0, ell_p])
    lam = np.array([lm, *([l0] * (d - 1)), lp])
    return EigenDecomposition(n, T, lam, R, L)


def numerical_jacobian(w, n, rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of ``f_n`` with step ``rel_step * max|w|``."""
    w = _as_state(w)
    n = _as_normal(n, w.size - 1)
    k = w.size
    h = rel_step * float(np.max(np.abs(w)))
    A = np.empty((k, k))
    for j in range(k):
        dw = np.zeros(k)
        dw[j] = h
        A[:, j] = (_normal_flux_unchecked(w + dw, n) - _normal_flux_unchecked(w - dw, n)) / (2.0 * h)
    return A
