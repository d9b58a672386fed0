"""Two-dimensional Cartesian finite-volume solver used as a cross-check.

Cells carry ``w = (m_x, m_y, E)`` in an array of shape ``(3, ny, nx)``.
Interface fluxes are local Lax-Friedrichs with the largest characteristic
speed of the two adjacent states.  ``order=1`` uses piecewise constant states
and forward Euler; ``order=2`` reconstructs the primitive variables
``(p, u_x, u_y)`` with minmod slopes and advances with two-stage SSP
Runge-Kutta.  Reconstructing primitives keeps every face state admissible.

The face kernel treats x- and y-faces with one routine written in
normal/tangential components, so data symmetric under ``x <-> y`` stays
symmetric to the last bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numba import njit

from .eigen import eigenvalues, normal_flux
from .errors import BlowUpError, InvalidInitialDataError, InvalidStateError

__all__ = [
    "CartesianGrid2D",
    "FieldState2D",
    "init_radial",
    "llf_flux",
    "primitives",
    "max_speed",
    "step",
    "run",
    "radial_profile",
    "radial_spread",
    "total_conserved",
]

P_FLOOR = 1e-12
BOUNDARY_CONDITIONS = ("outflow", "periodic", "reflective")


@dataclass(frozen=True)
class CartesianGrid2D:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError("need at least 4 cells per direction")
        if not (self.x_hi > self.x_lo and self.y_hi > self.y_lo):
            raise ValueError("domain bounds must be increasing")

    @classmethod
    def square(cls, half_width: float, n: int) -> "CartesianGrid2D":
        return cls(-half_width, half_width, -half_width, half_width, n, n)

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.nx

    @property
    def dy(self) -> float:
        return (self.y_hi - self.y_lo) / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-centre coordinate arrays of shape ``(ny, nx)``."""
        x = self.x_lo + (np.arange(self.nx) + 0.5) * self.dx
        y = self.y_lo + (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y)


@dataclass
class FieldState2D:
    grid: CartesianGrid2D
    w: np.ndarray
    t: float = 0.0
    floor_events: int = 0
    # time-integrated flux leaving through the outer boundary, per component
    flux_out: np.ndarray = field(default_factory=lambda: np.zeros(3))
    steps: int = 0

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if self.w.shape != (3, self.grid.ny, self.grid.nx):
            raise ValueError("w must have shape (3, ny, nx)")


def init_radial(
    grid: CartesianGrid2D,
    p0: Callable,
    profile: Callable,
    kind: str = "v",
) -> FieldState2D:
    """Sample radial data ``p0(r)`` and velocity ``profile(r)`` along ``x/|x|``.

    ``kind="v"`` reads ``profile`` as the physical speed, ``kind="u"`` as the
    four-velocity.  A cell centred exactly at the origin gets ``u = 0``.
    """
    if kind not in ("v", "u"):
        raise ValueError("kind must be 'v' or 'u'")
    X, Y = grid.centers()
    r = np.hypot(X, Y)
    p = np.broadcast_to(np.asarray(p0(r), dtype=float), r.shape)
    s = np.broadcast_to(np.asarray(profile(r), dtype=float), r.shape)
    if not np.all(p > 0) or not np.all(np.isfinite(p)):
        raise InvalidInitialDataError("initial pressure must be positive and finite")
    if kind == "v":
        if not np.all(np.abs(s) < 1.0):
            raise InvalidInitialDataError("initial velocity must satisfy |v| < 1")
        u = s / np.sqrt((1.0 - s) * (1.0 + s))
    else:
        if not np.all(np.isfinite(s)):
            raise InvalidInitialDataError("initial four-velocity must be finite")
        u = s
    with np.errstate(invalid="ignore", divide="ignore"):
        ux = np.where(r > 0, u * X / r, 0.0)
        uy = np.where(r > 0, u * Y / r, 0.0)
    u2 = ux * ux + uy * uy
    g = np.sqrt(1.0 + u2)
    w = np.stack([4.0 * p * ux * g, 4.0 * p * uy * g, p * (3.0 + 4.0 * u2)])
    return FieldState2D(grid, w)


def llf_flux(wL, wR, n) -> np.ndarray:
    """Local Lax-Friedrichs flux for an arbitrary unit normal (reference path)."""
    wL = np.asarray(wL, dtype=float)
    wR = np.asarray(wR, dtype=float)
    s = max(max(abs(x) for x in eigenvalues(wL, n)), max(abs(x) for x in eigenvalues(wR, n)))
    return 0.5 * (normal_flux(wL, n) + normal_flux(wR, n)) - 0.5 * s * (wR - wL)


# -- numba kernels ------------------------------------------------------------


@njit(cache=True)
def _to_primitive(mx, my, E):
    m2 = mx * mx + my * my
    m = math.sqrt(m2)
    p = (E - m) * (E + m) / (E + math.sqrt(4.0 * E * E - 3.0 * m2))
    s = math.sqrt(4.0 * p * (E + p))
    return p, mx / s, my / s


@njit(cache=True)
def _primitives_kernel(w, prim):
    """Fill ``prim`` with (p, ux, uy); return the number of inadmissible cells."""
    bad = 0
    ny, nx = w.shape[1], w.shape[2]
    for j in range(ny):
        for i in range(nx):
            mx, my, E = w[0, j, i], w[1, j, i], w[2, j, i]
            if not (mx * mx + my * my < E * E) or not E > 0.0:
                bad += 1
                prim[0, j, i] = -1.0
                continue
            p, ux, uy = _to_primitive(mx, my, E)
            if not p > 0.0:
                bad += 1
                prim[0, j, i] = -1.0
                continue
            prim[0, j, i] = p
            prim[1, j, i] = ux
            prim[2, j, i] = uy
    return bad


@njit(cache=True)
def _floor_kernel(w, p_floor):
    """Shrink the momentum of cells with p <= p_floor; return (events, fatal)."""
    events = 0
    ny, nx = w.shape[1], w.shape[2]
    for j in range(ny):
        for i in range(nx):
            mx, my, E = w[0, j, i], w[1, j, i], w[2, j, i]
            if not E > 3.0 * p_floor:
                return events, True
            m2 = mx * mx + my * my
            ok = m2 < E * E
            if ok:
                p, _, _ = _to_primitive(mx, my, E)
                ok = p > p_floor
            if not ok:
                # momentum magnitude giving exactly p = p_floor at this energy
                u2 = (E / p_floor - 3.0) / 4.0
                target = 4.0 * p_floor * math.sqrt(u2 * (1.0 + u2))
                m = math.sqrt(m2)
                if m > 0.0:
                    w[0, j, i] = mx * target / m
                    w[1, j, i] = my * target / m
                events += 1
    return events, False


@njit(cache=True)
def _minmod(a, b):
    if a * b <= 0.0:
        return 0.0
    if abs(a) < abs(b):
        return a
    return b


@njit(cache=True)
def _face(pL, nL, tL, pR, nR, tR, out):
    """LLF flux through a face with primitive (p, u_normal, u_tangential) states."""
    u2L = nL * nL + tL * tL
    u2R = nR * nR + tR * tR
    gL = math.sqrt(1.0 + u2L)
    gR = math.sqrt(1.0 + u2R)
    # conserved variables in (normal, tangential, energy) order
    wnL = 4.0 * pL * nL * gL
    wtL = 4.0 * pL * tL * gL
    EL = pL * (3.0 + 4.0 * u2L)
    wnR = 4.0 * pR * nR * gR
    wtR = 4.0 * pR * tR * gR
    ER = pR * (3.0 + 4.0 * u2R)
    rootL = math.sqrt(3.0 + 2.0 * tL * tL)
    rootR = math.sqrt(3.0 + 2.0 * tR * tR)
    sL = (abs(2.0 * nL * gL) + rootL) / (3.0 + 2.0 * u2L)
    sR = (abs(2.0 * nR * gR) + rootR) / (3.0 + 2.0 * u2R)
    s = max(sL, sR)
    out[0] = 0.5 * ((pL + 4.0 * pL * (nL * nL)) + (pR + 4.0 * pR * (nR * nR))) - 0.5 * s * (wnR - wnL)
    out[1] = 0.5 * (4.0 * pL * (tL * nL) + 4.0 * pR * (tR * nR)) - 0.5 * s * (wtR - wtL)
    out[2] = 0.5 * (wnL + wnR) - 0.5 * s * (ER - EL)


@njit(cache=True)
def _fill_ghosts(q, ng, bc):
    """bc: 0 outflow, 1 periodic, 2 reflective (normal velocity flips)."""
    ny = q.shape[1] - 2 * ng
    nx = q.shape[2] - 2 * ng
    for c in range(3):
        for j in range(ng, ng + ny):
            for k in range(ng):
                if bc == 0:
                    q[c, j, k] = q[c, j, ng]
                    q[c, j, ng + nx + k] = q[c, j, ng + nx - 1]
                elif bc == 1:
                    q[c, j, k] = q[c, j, nx + k]
                    q[c, j, ng + nx + k] = q[c, j, ng + k]
                else:
                    sign = -1.0 if c == 1 else 1.0
                    q[c, j, ng - 1 - k] = sign * q[c, j, ng + k]
                    q[c, j, ng + nx + k] = sign * q[c, j, ng + nx - 1 - k]
        for k in range(ng):
            for i in range(q.shape[2]):
                if bc == 0:
                    q[c, k, i] = q[c, ng, i]
                    q[c, ng + ny + k, i] = q[c, ng + ny - 1, i]
                elif bc == 1:
                    q[c, k, i] = q[c, ny + k, i]
                    q[c, ng + ny + k, i] = q[c, ng + k, i]
                else:
                    sign = -1.0 if c == 2 else 1.0
                    q[c, ng - 1 - k, i] = sign * q[c, ng + k, i]
                    q[c, ng + ny + k, i] = sign * q[c, ng + ny - 1 - k, i]


@njit(cache=True)
def _rhs_kernel(q, ng, dx, dy, second_order, dw, boundary):
    """``dw = -div F``; ``boundary`` receives the outward boundary flux rate."""
    ny = dw.shape[1]
    nx = dw.shape[2]
    for c in range(3):
        boundary[c] = 0.0
    for j in range(ny):
        for i in range(nx):
            for c in range(3):
                dw[c, j, i] = 0.0
    out = np.empty(3)
    # x-faces: face f sits between cells f-1 and f (interior indices)
    for j in range(ny):
        jj = j + ng
        for f in range(nx + 1):
            iL = f - 1 + ng
            iR = f + ng
            pL, nL, tL = q[0, jj, iL], q[1, jj, iL], q[2, jj, iL]
            pR, nR, tR = q[0, jj, iR], q[1, jj, iR], q[2, jj, iR]
            if second_order:
                pL += 0.5 * _minmod(q[0, jj, iL] - q[0, jj, iL - 1], q[0, jj, iR] - q[0, jj, iL])
                nL += 0.5 * _minmod(q[1, jj, iL] - q[1, jj, iL - 1], q[1, jj, iR] - q[1, jj, iL])
                tL += 0.5 * _minmod(q[2, jj, iL] - q[2, jj, iL - 1], q[2, jj, iR] - q[2, jj, iL])
                pR -= 0.5 * _minmod(q[0, jj, iR] - q[0, jj, iL], q[0, jj, iR + 1] - q[0, jj, iR])
                nR -= 0.5 * _minmod(q[1, jj, iR] - q[1, jj, iL], q[1, jj, iR + 1] - q[1, jj, iR])
                tR -= 0.5 * _minmod(q[2, jj, iR] - q[2, jj, iL], q[2, jj, iR + 1] - q[2, jj, iR])
            _face(pL, nL, tL, pR, nR, tR, out)
            fx0, fx1, fx2 = out[0], out[1], out[2]
            if f > 0:
                dw[0, j, f - 1] -= fx0 / dx
                dw[1, j, f - 1] -= fx1 / dx
                dw[2, j, f - 1] -= fx2 / dx
            else:
                boundary[0] -= fx0 * dy
                boundary[1] -= fx1 * dy
                boundary[2] -= fx2 * dy
            if f < nx:
                dw[0, j, f] += fx0 / dx
                dw[1, j, f] += fx1 / dx
                dw[2, j, f] += fx2 / dx
            else:
                boundary[0] += fx0 * dy
                boundary[1] += fx1 * dy
                boundary[2] += fx2 * dy
    # y-faces: normal component is u_y, tangential u_x
    for i in range(nx):
        ii = i + ng
        for f in range(ny + 1):
            jL = f - 1 + ng
            jR = f + ng
            pL, nL, tL = q[0, jL, ii], q[2, jL, ii], q[1, jL, ii]
            pR, nR, tR = q[0, jR, ii], q[2, jR, ii], q[1, jR, ii]
            if second_order:
                pL += 0.5 * _minmod(q[0, jL, ii] - q[0, jL - 1, ii], q[0, jR, ii] - q[0, jL, ii])
                nL += 0.5 * _minmod(q[2, jL, ii] - q[2, jL - 1, ii], q[2, jR, ii] - q[2, jL, ii])
                tL += 0.5 * _minmod(q[1, jL, ii] - q[1, jL - 1, ii], q[1, jR, ii] - q[1, jL, ii])
                pR -= 0.5 * _minmod(q[0, jR, ii] - q[0, jL, ii], q[0, jR + 1, ii] - q[0, jR, ii])
                nR -= 0.5 * _minmod(q[2, jR, ii] - q[2, jL, ii], q[2, jR + 1, ii] - q[2, jR, ii])
                tR -= 0.5 * _minmod(q[1, jR, ii] - q[1, jL, ii], q[1, jR + 1, ii] - q[1, jR, ii])
            _face(pL, nL, tL, pR, nR, tR, out)
            gy_n, gy_t, gy_e = out[0], out[1], out[2]
            if f > 0:
                dw[1, f - 1, i] -= gy_n / dy
                dw[0, f - 1, i] -= gy_t / dy
                dw[2, f - 1, i] -= gy_e / dy
            else:
                boundary[1] -= gy_n * dx
                boundary[0] -= gy_t * dx
                boundary[2] -= gy_e * dx
            if f < ny:
                dw[1, f, i] += gy_n / dy
                dw[0, f, i] += gy_t / dy
                dw[2, f, i] += gy_e / dy
            else:
                boundary[1] += gy_n * dx
                boundary[0] += gy_t * dx
                boundary[2] += gy_e * dx


@njit(cache=True)
def _max_speed_kernel(prim):
    s = 0.0
    ny, nx = prim.shape[1], prim.shape[2]
    for j in range(ny):
        for i in range(nx):
            ux, uy = prim[1, j, i], prim[2, j, i]
            u2 = ux * ux + uy * uy
            g = math.sqrt(1.0 + u2)
            for un, ut in ((ux, uy), (uy, ux)):
                lam = (abs(2.0 * un * g) + math.sqrt(3.0 + 2.0 * ut * ut)) / (3.0 + 2.0 * u2)
                if lam > s:
                    s = lam
    return s


# -- driver -------------------------------------------------------------------


def primitives(state: FieldState2D) -> np.ndarray:
    """``(p, u_x, u_y)`` with shape ``(3, ny, nx)``; raises on inadmissible cells."""
    prim = np.empty_like(state.w)
    if _primitives_kernel(state.w, prim):
        raise InvalidStateError("field contains cells with |m| >= E")
    return prim


def max_speed(state: FieldState2D) -> float:
    return float(_max_speed_kernel(primitives(state)))


def total_conserved(state: FieldState2D) -> np.ndarray:
    """Cell-area weighted sums of the three conserved components."""
    return state.w.sum(axis=(1, 2)) * state.grid.cell_area


def _bc_code(bc: str) -> int:
    try:
        return BOUNDARY_CONDITIONS.index(bc)
    except ValueError:
        raise ValueError(f"bc must be one of {BOUNDARY_CONDITIONS}") from None


def _operator(w, grid, order, bc_code, ng=2):
    prim = np.empty_like(w)
    if _primitives_kernel(w, prim):
        raise BlowUpError("inadmissible cell entering the flux evaluation")
    q = np.empty((3, grid.ny + 2 * ng, grid.nx + 2 * ng))
    q[:, ng:-ng, ng:-ng] = prim
    _fill_ghosts(q, ng, bc_code)
    dw = np.empty_like(w)
    boundary = np.empty(3)
    _rhs_kernel(q, ng, grid.dx, grid.dy, order == 2, dw, boundary)
    return dw, boundary


def _apply_floor(w):
    events, fatal = _floor_kernel(w, P_FLOOR)
    if fatal:
        raise BlowUpError("cell energy dropped to the pressure floor")
    return events


def step(
    state: FieldState2D,
    cfl: float = 0.45,
    *,
    order: int = 1,
    bc: str = "outflow",
    dt_max: float | None = None,
) -> FieldState2D:
    """Advance one time step with ``dt = cfl * min(dx, dy) / s_max``."""
    if not 0.0 < cfl < 1.0:
        raise ValueError("cfl must lie in (0, 1)")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    grid = state.grid
    code = _bc_code(bc)
    s = max_speed(state)
    dt = cfl * min(grid.dx, grid.dy) / s
    if dt_max is not None:
        dt = min(dt, dt_max)
    w0 = state.w
    L0, B0 = _operator(w0, grid, order, code)
    w1 = w0 + dt * L0
    events = _apply_floor(w1)
    if order == 1:
        w_new, flux = w1, dt * B0
    else:
        L1, B1 = _operator(w1, grid, order, code)
        w_new = 0.5 * w0 + 0.5 * (w1 + dt * L1)
        events += _apply_floor(w_new)
        flux = 0.5 * dt * (B0 + B1)
    return replace(
        state,
        w=w_new,
        t=state.t + dt,
        floor_events=state.floor_events + events,
        flux_out=state.flux_out + flux,
        steps=state.steps + 1,
    )


def run(
    state: FieldState2D,
    t_end: float,
    cfl: float = 0.45,
    *,
    order: int = 1,
    bc: str = "outflow",
    callback: Callable[[FieldState2D], None] | None = None,
) -> FieldState2D:
    """Step until ``t_end`` exactly (the last step is shortened)."""
    while state.t < t_end * (1.0 - 1e-14):
        state = step(state, cfl, order=order, bc=bc, dt_max=t_end - state.t)
        if callback is not None:
            callback(state)
    return state


def _binned(state, nbins, r_max):
    if nbins < 1:
        raise ValueError("nbins must be >= 1")
    X, Y = state.grid.centers()
    r = np.hypot(X, Y).ravel()
    prim = primitives(state)
    p = prim[0].ravel()
    ux, uy = prim[1].ravel(), prim[2].ravel()
    with np.errstate(invalid="ignore", divide="ignore"):
        ur = np.where(r > 0, (ux * X.ravel() + uy * Y.ravel()) / r, 0.0)
    v = ur / np.sqrt(1.0 + ux * ux + uy * uy)
    r_max = float(r.max()) if r_max is None else float(r_max)
    edges = np.linspace(0.0, r_max, nbins + 1)
    idx = np.clip(np.digitize(r, edges) - 1, 0, nbins - 1)
    keep = r <= r_max
    idx, p, v = idx[keep], p[keep], v[keep]
    count = np.bincount(idx, minlength=nbins).astype(float)
    centres = 0.5 * (edges[:-1] + edges[1:])
    return centres, idx, p, v, count


def radial_profile(state: FieldState2D, nbins: int, r_max: float | None = None):
    """Bin averages ``(r, p, v_r)`` over equal-width radial bins on ``[0, r_max]``.

    ``v_r = (u . x/|x|) / sqrt(1 + |u|^2)``.  Empty bins are NaN.
    """
    r, idx, p, v, count = _binned(state, nbins, r_max)
    with np.errstate(invalid="ignore", divide="ignore"):
        pm = np.bincount(idx, p, minlength=nbins) / count
        vm = np.bincount(idx, v, minlength=nbins) / count
    return r, pm, vm


def radial_spread(state: FieldState2D, nbins: int, r_max: float | None = None) -> float:
    """Largest in-bin standard deviation of ``p``: departure from radial symmetry."""
    r, idx, p, v, count = _binned(state, nbins, r_max)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.bincount(idx, p, minlength=nbins) / count
        var = np.bincount(idx, (p - mean[idx]) ** 2, minlength=nbins) / count
    return float(np.nanmax(np.sqrt(var)))
