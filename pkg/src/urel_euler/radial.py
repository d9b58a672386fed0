"""Staggered-grid scheme for radially symmetric ultra-relativistic flow.

The radial system for ``d`` space dimensions reads

    d/dt (x^{d-1} a) + d/dx (x^{d-1} b) = 0
    d/dt (x^{d-1} b) + d/dx (x^{d-1} c) = (d-1)/2 x^{d-2} (a - c)

and is discretised on a staggered grid: each new value sits at the midpoint of
the vertical chord of a triangular space-time balance region whose two slanted
chords have their midpoints at neighbouring points of the previous level.  The
update (:func:`euler_update`) integrates both balance laws over that triangle
with the weight ``x^{d-1}`` integrated exactly.  For ``d = 2`` the result is the
closed-form two-dimensional update; ``d = 3`` uses the same construction with
the cubic weight.

Two deliberate rearrangements of the algebra keep the update exact on the
discrete level:

* ``c`` is split as ``p + b^2/(a + p)`` and the pressure part of the flux is
  grouped with the geometric source, so a fluid at rest is reproduced to the
  last bit;
* the implicit equation ``b' = xi + eta sqrt(4a'^2 - 3b'^2)`` is solved with
  the rationalised root whenever ``xi < 0`` to avoid cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from numba import njit

from .errors import (
    CFLViolationError,
    GridGeometryError,
    InvalidInitialDataError,
    StateSpaceError,
)
from .state import ConservedPair, conserved_arrays, pressure_arrays, primitive_arrays

__all__ = [
    "StaggeredGrid",
    "LevelSolution",
    "SpaceTimeRecord",
    "Shock",
    "build_grid",
    "weight_coefficients",
    "euler_update",
    "euler_update_arrays",
    "reflect_boundary",
    "initialize",
    "advance_level",
    "run",
    "detect_shocks",
]


@dataclass(frozen=True)
class StaggeredGrid:
    t_star: float
    x_star: float
    N: int
    M: int
    dt: float
    dx: float
    lam: float
    d: int = 2

    @property
    def n_levels(self) -> int:
        return 2 * self.N + 1

    def level_size(self, n: int) -> int:
        """Number of grid points on level ``n`` (1-based)."""
        return self.M + self.N - (n - 1) // 2

    def level_time(self, n: int) -> float:
        return (n - 1) * self.dt

    def level_positions(self, n: int) -> np.ndarray:
        k = np.arange(self.level_size(n), dtype=float)
        if n % 2 == 1:
            return (k + 0.5) * self.dx
        return k * self.dx

    @cached_property
    def _node_coefficients(self):
        # interior points of even levels sit on the nodes x_j = (j-1) dx, j >= 2
        xbar = np.arange(1, self.M + self.N, dtype=float) * self.dx
        return weight_coefficients(self.d, xbar, self.dx, self.lam)

    @cached_property
    def _midpoint_coefficients(self):
        xbar = (np.arange(self.M + self.N, dtype=float) + 0.5) * self.dx
        return weight_coefficients(self.d, xbar, self.dx, self.lam)


@dataclass
class LevelSolution:
    n: int
    t: float
    x: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def primitive(self) -> tuple[np.ndarray, np.ndarray]:
        """Pressure and velocity ``v`` at the level's points."""
        p, u = primitive_arrays(self.a, self.b)
        return p, u / np.sqrt(1.0 + u * u)

    def is_admissible(self) -> bool:
        return bool(np.all(np.abs(self.b) < self.a))


@dataclass
class SpaceTimeRecord:
    """Thinned list of levels plus the on-axis time series of every level."""

    grid: StaggeredGrid
    levels: list[LevelSolution] = field(default_factory=list)
    axis_t: np.ndarray | None = None
    axis_x: np.ndarray | None = None
    axis_a: np.ndarray | None = None
    axis_b: np.ndarray | None = None

    @property
    def final(self) -> LevelSolution:
        return self.levels[-1]

    def axis_pressure(self) -> np.ndarray:
        return pressure_arrays(self.axis_a, self.axis_b)


@dataclass(frozen=True)
class Shock:
    position: float
    jump: float
    left_index: int
    right_index: int


def build_grid(t_star: float, x_star: float, N: int, d: int = 2) -> StaggeredGrid:
    if not (t_star > 0 and x_star > 0):
        raise ValueError("t_star and x_star must be positive")
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    if d < 1 or int(d) != d:
        raise ValueError("d must be a positive integer")
    N = int(N)
    if N * x_star < t_star:
        raise CFLViolationError(
            f"N * x_star = {N * x_star} < t_star = {t_star}; the mesh ratio would drop below 1"
        )
    M = math.floor(x_star / t_star * N)
    dt = t_star / (2 * N)
    dx = x_star / M
    return StaggeredGrid(t_star, x_star, N, M, dt, dx, dx / (2 * dt), int(d))


def weight_coefficients(d: int, xbar, dx: float, lam: float):
    """Return ``(delta, kappa)`` for balance regions centred at ``xbar > 0``.

    ``delta = (W+ - W-) / (2 W0)`` where ``W-``, ``W+`` are the integrals of
    ``x^{d-1}`` over the lower and upper half of the vertical chord and ``W0``
    their sum; ``kappa = 2 delta / lam`` multiplies both the pressure flux
    difference and the geometric source.  For ``d = 2`` ``delta = q/2`` with
    ``q = dx / (2 xbar)``.
    """
    xbar = np.asarray(xbar, dtype=float)
    q = dx / (2.0 * xbar)
    if d == 2:
        delta = 0.5 * q
    else:
        r = 2.0 * q
        even = np.zeros_like(r)
        odd = np.zeros_like(r)
        for k in range(1, d + 1):
            term = math.comb(d, k) * r**k
            if k % 2:
                odd = odd + term
            else:
                even = even + term
        delta = even / (2.0 * odd)
    return delta, 2.0 * delta / lam


def euler_update_arrays(am, bm, ap, bp, delta, kappa, lam):
    """Vectorised interior update (``xbar > 0``); no validation."""
    pm = pressure_arrays(am, bm)
    pp = pressure_arrays(ap, bp)
    km = bm * bm / (am + pm)
    kp = bp * bp / (ap + pp)

    left = am + bm / lam
    right = ap - bp / lam
    a_new = 0.5 * (left + right) + delta * (right - left)

    # b' = Y + kappa * (p(a', b') - p(a', 0)), Y vanishes for a fluid at rest
    p_rest = pressure_arrays(a_new, 0.0)
    y = (
        0.5 * (bm + bp)
        + delta * (bp - bm)
        + (0.5 * (pm - pp) + 0.5 * (km - kp) - delta * (km + kp)) / lam
        + kappa * (p_rest - 0.5 * (pm + pp))
    )
    eta = kappa / 3.0
    xi = y - 2.0 * eta * a_new
    one_p = 1.0 + 3.0 * eta * eta
    root = np.sqrt(4.0 * a_new * a_new * one_p - 3.0 * xi * xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        b_plus = (xi + eta * root) / one_p
        b_rat = y * (4.0 * eta * a_new - y) / (eta * root - xi)
    b_new = np.where(xi >= 0.0, b_plus, b_rat)
    return a_new, b_new


def euler_update(a_minus, b_minus, a_plus, b_plus, x_bar, dx, lam, d: int = 2):
    """Single balance-region update returning ``(a', b')``.

    ``x_bar = 0`` selects the boundary form ``a' = a+ - b+/lam, b' = 0``.
    """
    for a, b in ((a_minus, b_minus), (a_plus, b_plus)):
        if not abs(b) < a:
            raise StateSpaceError(f"input state outside |b| < a: a={a!r}, b={b!r}")
    if lam < 1.0:
        raise CFLViolationError(f"mesh ratio {lam} < 1")
    if x_bar < 0:
        raise GridGeometryError("x_bar must be non-negative")
    if x_bar == 0:
        return float(a_plus - b_plus / lam), 0.0
    if dx / (2.0 * x_bar) > 1.0 + 1e-12:
        raise GridGeometryError(f"dx/(2 x_bar) = {dx / (2.0 * x_bar)} exceeds 1")
    delta, kappa = weight_coefficients(d, x_bar, dx, lam)
    a_new, b_new = euler_update_arrays(
        float(a_minus), float(b_minus), float(a_plus), float(b_plus), delta, kappa, lam
    )
    return float(a_new), float(b_new)


def reflect_boundary(state) -> tuple[float, float]:
    """Mirror state used as the left neighbour of the axis point.

    Accepts a :class:`~urel_euler.state.ConservedPair` or an ``(a, b)`` pair.
    """
    a, b = (state.a, state.b) if isinstance(state, ConservedPair) else state
    if not abs(b) < a:
        raise StateSpaceError(f"state outside |b| < a: a={a!r}, b={b!r}")
    return a, -b


def initialize(
    grid: StaggeredGrid,
    p0: Callable,
    v0: Callable | None = None,
    *,
    u0: Callable | None = None,
) -> LevelSolution:
    """Sample the initial data at the cell midpoints of level 1.

    Velocity is given either as the physical speed ``v0`` or as the radial
    four-velocity ``u0``; exactly one must be supplied.
    """
    if (v0 is None) == (u0 is None):
        raise ValueError("give exactly one of v0 or u0")
    x = grid.level_positions(1)
    p = np.broadcast_to(np.asarray(p0(x), dtype=float), x.shape)
    if not np.all(p > 0) or not np.all(np.isfinite(p)):
        raise InvalidInitialDataError("initial pressure must be positive and finite")
    if u0 is not None:
        u = np.broadcast_to(np.asarray(u0(x), dtype=float), x.shape)
        if not np.all(np.isfinite(u)):
            raise InvalidInitialDataError("initial four-velocity must be finite")
    else:
        v = np.broadcast_to(np.asarray(v0(x), dtype=float), x.shape)
        if not np.all(np.abs(v) < 1.0):
            raise InvalidInitialDataError("initial velocity must satisfy |v| < 1")
        u = v / np.sqrt((1.0 - v) * (1.0 + v))
    a, b = conserved_arrays(p, u)
    return LevelSolution(1, 0.0, x, np.array(a), np.array(b))


@njit(cache=True)
def _cell(am, bm, ap, bp, delta, kappa, lam):
    pm = (am - bm) * (am + bm) / (am + math.sqrt(4.0 * am * am - 3.0 * bm * bm))
    pp = (ap - bp) * (ap + bp) / (ap + math.sqrt(4.0 * ap * ap - 3.0 * bp * bp))
    km = bm * bm / (am + pm)
    kp = bp * bp / (ap + pp)
    left = am + bm / lam
    right = ap - bp / lam
    a_new = 0.5 * (left + right) + delta * (right - left)
    p_rest = a_new * a_new / (a_new + math.sqrt(4.0 * a_new * a_new))
    y = (
        0.5 * (bm + bp)
        + delta * (bp - bm)
        + (0.5 * (pm - pp) + 0.5 * (km - kp) - delta * (km + kp)) / lam
        + kappa * (p_rest - 0.5 * (pm + pp))
    )
    eta = kappa / 3.0
    xi = y - 2.0 * eta * a_new
    one_p = 1.0 + 3.0 * eta * eta
    root = math.sqrt(4.0 * a_new * a_new * one_p - 3.0 * xi * xi)
    if xi >= 0.0:
        b_new = (xi + eta * root) / one_p
    else:
        b_new = y * (4.0 * eta * a_new - y) / (eta * root - xi)
    return a_new, b_new


@njit(cache=True)
def _advance_kernel(odd, a, b, delta, kappa, lam, a_out, b_out):
    """Fill ``a_out``/``b_out``; return the first inadmissible index or -1."""
    bad = -1
    if odd:
        a_out[0] = a[0] - b[0] / lam
        b_out[0] = 0.0
        if not a_out[0] > 0.0:
            bad = 0
        for j in range(1, a_out.size):
            an, bn = _cell(a[j - 1], b[j - 1], a[j], b[j], delta[j - 1], kappa[j - 1], lam)
            a_out[j] = an
            b_out[j] = bn
            if bad < 0 and not abs(bn) < an:
                bad = j
    else:
        for j in range(a_out.size):
            an, bn = _cell(a[j], b[j], a[j + 1], b[j + 1], delta[j], kappa[j], lam)
            a_out[j] = an
            b_out[j] = bn
            if bad < 0 and not abs(bn) < an:
                bad = j
    return bad


def _advance_arrays(grid: StaggeredGrid, n: int, a: np.ndarray, b: np.ndarray):
    odd = n % 2 == 1
    size = a.size if odd else a.size - 1
    delta, kappa = grid._node_coefficients if odd else grid._midpoint_coefficients
    a_new = np.empty(size)
    b_new = np.empty(size)
    bad = _advance_kernel(odd, a, b, delta, kappa, grid.lam, a_new, b_new)
    if bad >= 0:
        raise StateSpaceError(
            f"admissibility lost at level {n + 1}, point {bad}: "
            f"a={a_new[bad]!r}, b={b_new[bad]!r}"
        )
    return a_new, b_new


def advance_level(grid: StaggeredGrid, level: LevelSolution) -> LevelSolution:
    n = level.n
    if not 1 <= n <= 2 * grid.N:
        raise ValueError(f"level index {n} outside 1..{2 * grid.N}")
    if level.a.size != grid.level_size(n):
        raise ValueError("level size does not match the grid")
    a, b = _advance_arrays(grid, n, level.a, level.b)
    return LevelSolution(n + 1, grid.level_time(n + 1), grid.level_positions(n + 1), a, b)


def run(
    grid: StaggeredGrid,
    p0: Callable,
    v0: Callable | None = None,
    record_stride: int | None = None,
    *,
    u0: Callable | None = None,
) -> SpaceTimeRecord:
    """March levels 1..2N+1 and return the thinned record.

    Levels with ``(n - 1) % record_stride == 0`` are stored together with the
    final level; ``record_stride=None`` keeps only the first and last level.
    The axis series (first grid point of every level) is always complete.
    """
    stride = 2 * grid.N if record_stride is None else int(record_stride)
    if stride < 1:
        raise ValueError("record_stride must be >= 1")
    level = initialize(grid, p0, v0, u0=u0)
    n_levels = grid.n_levels
    axis_a = np.empty(n_levels)
    axis_b = np.empty(n_levels)
    axis_x = np.where(np.arange(1, n_levels + 1) % 2 == 1, 0.5 * grid.dx, 0.0)
    record = SpaceTimeRecord(grid)
    record.levels.append(level)

    a, b = level.a, level.b
    axis_a[0], axis_b[0] = a[0], b[0]
    for n in range(1, n_levels):
        a, b = _advance_arrays(grid, n, a, b)
        axis_a[n], axis_b[n] = a[0], b[0]
        if n % stride == 0 or n == n_levels - 1:
            record.levels.append(
                LevelSolution(n + 1, grid.level_time(n + 1), grid.level_positions(n + 1), a, b)
            )
    record.axis_t = np.arange(n_levels) * grid.dt
    record.axis_x = axis_x
    record.axis_a = axis_a
    record.axis_b = axis_b
    return record


def detect_shocks(x, v, factor: float = 10.0) -> list[Shock]:
    """Flag jumps where ``|dv|`` exceeds ``factor`` times the median ``|dv|``.

    Contiguous flagged pairs form one shock, located at the midpoint of the
    pair with the largest jump.  Shocks are returned strongest first.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    dv = np.abs(np.diff(v))
    if dv.size == 0:
        return []
    threshold = factor * np.median(dv)
    if threshold == 0.0:
        threshold = factor * np.finfo(float).eps * max(1.0, float(np.max(np.abs(v))))
    flagged = np.flatnonzero(dv > threshold)
    shocks = []
    if flagged.size == 0:
        return shocks
    breaks = np.flatnonzero(np.diff(flagged) > 1)
    for cluster in np.split(flagged, breaks + 1):
        i = int(cluster[np.argmax(dv[cluster])])
        shocks.append(
            Shock(
                position=0.5 * (x[i] + x[i + 1]),
                jump=float(v[cluster[-1] + 1] - v[cluster[0]]),
                left_index=int(cluster[0]),
                right_index=int(cluster[-1] + 1),
            )
        )
    shocks.sort(key=lambda s: -abs(s.jump))
    return shocks
