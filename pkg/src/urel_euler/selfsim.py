"""Self-similar reference solutions for constant far-field inflow/outflow.

For initial data ``p0 = 1`` and constant velocity ``v0`` the radial problem
admits solutions ``p = P(theta)``, ``v = V(theta)`` of the similarity variable
``theta = t / x``.  They satisfy

    V' = (d-1) V (V - theta) (1 - V^2) / f
    P' = (d-1) 4 P V (theta V - 1) / f,    f = 3 (theta V - 1)^2 - (V - theta)^2

with ``V(0) = v0``, ``P(0) = 1``.  For inflow (``v0 < 0``) a shock sits where
``V(theta) = 3/(2 theta) - theta/2``; behind it the gas is at rest with
pressure ``p-``.  For outflow (``v0 > 0``, ``d = 2``) ``V`` decays to zero at
the sonic point ``theta = sqrt(3)`` and the solution continues with a quiescent
core.

The ODE is marched with fixed-step classical RK4 inside a numba kernel; the
shock location is polished by re-integrating a single partial step from the
bracketing state and solving for the sign change with Brent's method.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.optimize import brentq

from .errors import DomainError, IntegrationError, InvalidStateError, ShockFitError

__all__ = [
    "ShockFit",
    "SelfSimilarProfile",
    "ode_rhs",
    "integrate",
    "fit_shock",
    "reference_profile",
    "profile_at_time",
    "entropy_check",
    "shock_condition",
    "blowup_bound",
]

SQRT3 = math.sqrt(3.0)
SINGULAR_TOL = 1e-10
DEFAULT_CAP = 10.0
DEFAULT_STRIDE = 1000
# the outflow profile is cut at the sonic point once V has decayed below this
SONIC_V_TOL = 1e-3

_SHOCK, _CAP, _SINGULAR, _SONIC, _SATURATED = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class ShockFit:
    theta_tilde: float
    s_tilde: float
    v_plus: float
    p_plus: float
    p_minus: float
    v_minus: float = 0.0
    residual: float = 0.0


@dataclass(frozen=True)
class SelfSimilarProfile:
    """Sampled solution of the similarity ODE.

    ``theta``, ``V``, ``P`` hold every ``stride``-th RK4 step.  ``bracket``
    is the last state ``(theta, V, P)`` before the stopping event; ``status``
    names the event (``"shock"``, ``"sonic"``, ``"cap"`` or ``"saturated"``).
    ``core_pressure`` is the rest pressure for ``theta > sqrt(3)`` of a sonic
    profile.
    """

    d: int
    v0: float
    h: float
    theta: np.ndarray
    V: np.ndarray
    P: np.ndarray
    status: str
    bracket: tuple[float, float, float]
    shock: ShockFit | None = None
    core_pressure: float | None = None

    @property
    def theta_max(self) -> float:
        return float(self.theta[-1])


@njit(cache=True)
def _rhs(d, th, V, P):
    f = 3.0 * (th * V - 1.0) ** 2 - (V - th) ** 2
    return (d - 1) * V * (V - th) * (1.0 - V * V) / f, (d - 1) * 4.0 * P * V * (th * V - 1.0) / f, f


@njit(cache=True)
def _rk4_step(d, th, V, P, h):
    k1v, k1p, _ = _rhs(d, th, V, P)
    k2v, k2p, _ = _rhs(d, th + 0.5 * h, V + 0.5 * h * k1v, P + 0.5 * h * k1p)
    k3v, k3p, _ = _rhs(d, th + 0.5 * h, V + 0.5 * h * k2v, P + 0.5 * h * k2p)
    k4v, k4p, _ = _rhs(d, th + h, V + h * k3v, P + h * k3p)
    return (
        V + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        P + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
    )


@njit(cache=True)
def _march(d, v0, h, cap, stride, out_th, out_v, out_p):
    """RK4 from theta = 0; returns (status, n_stored, k, V_k, P_k).

    The step index ``k`` and state are those of the last step before the
    stopping event; theta is always recomputed as ``k * h`` to avoid drift.
    """
    V = v0
    P = 1.0
    k = 0
    n = 0
    out_th[0] = 0.0
    out_v[0] = V
    out_p[0] = P
    n = 1
    while True:
        th = k * h
        th_next = (k + 1) * h
        if th_next > cap:
            return _CAP, n, k, V, P
        if v0 > 0.0 and th_next > SQRT3 and abs(V) < SONIC_V_TOL:
            return _SONIC, n, k, V, P
        f = 3.0 * (th * V - 1.0) ** 2 - (V - th) ** 2
        if abs(f) < SINGULAR_TOL * (1.0 + th * th):
            return _SINGULAR, n, k, V, P
        Vn, Pn = _rk4_step(d, th, V, P, h)
        if not (math.isfinite(Vn) and math.isfinite(Pn)) or Pn <= 0.0:
            return _SINGULAR, n, k, V, P
        if v0 < 0.0 and th_next > 1.0 and Vn - (1.5 / th_next - 0.5 * th_next) > 0.0:
            return _SHOCK, n, k, V, P
        if Vn >= 1.0 - 1e-12:
            return _SATURATED, n, k, V, P
        V = Vn
        P = Pn
        k += 1
        if k % stride == 0 and n < out_th.size:
            out_th[n] = k * h
            out_v[n] = V
            out_p[n] = P
            n += 1


def ode_rhs(d: int, theta: float, V: float, P: float) -> tuple[float, float]:
    """Right-hand side ``(V', P')`` of the similarity ODE.

    Raises :class:`IntegrationError` close to the singular curve ``f = 0``.
    """
    f = 3.0 * (theta * V - 1.0) ** 2 - (V - theta) ** 2
    if abs(f) < SINGULAR_TOL * (1.0 + theta * theta):
        raise IntegrationError(f"singular curve reached at theta={theta!r}, V={V!r}")
    dv, dp, _ = _rhs(d, float(theta), float(V), float(P))
    return dv, dp


def shock_condition(theta, V):
    """``g = V - (3/(2 theta) - theta/2)``; the shock sits at the sign change."""
    return V - (1.5 / theta - 0.5 * theta)


def blowup_bound(theta):
    """Singular branch ``-(theta - sqrt3)/(sqrt3 theta - 1)`` of ``f = 0``.

    Inflow profiles approach it from below; the shock is reached first.
    """
    return -(theta - SQRT3) / (SQRT3 * theta - 1.0)


def integrate(
    d: int,
    v0: float,
    h: float = 1e-6,
    cap: float = DEFAULT_CAP,
    stride: int = DEFAULT_STRIDE,
) -> SelfSimilarProfile:
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")
    if not (-1.0 < v0 < 1.0) or v0 == 0.0:
        raise ValueError("v0 must lie in (-1, 1) without 0")
    if not h > 0:
        raise ValueError("h must be positive")
    n_max = int(cap / h) // stride + 2
    out_th = np.empty(n_max)
    out_v = np.empty(n_max)
    out_p = np.empty(n_max)
    status, n, k, V, P = _march(d, float(v0), float(h), float(cap), int(stride), out_th, out_v, out_p)
    th = k * h
    if v0 < 0 and status != _SHOCK:
        raise IntegrationError(
            f"no shock bracket found before theta={th:.6g} (d={d}, v0={v0})"
        )
    theta, Vs, Ps = out_th[:n], out_v[:n], out_p[:n]
    if theta[-1] != th:
        theta, Vs, Ps = np.append(theta, th), np.append(Vs, V), np.append(Ps, P)
    core = None
    name = {_SHOCK: "shock", _CAP: "cap", _SINGULAR: "singular", _SONIC: "sonic", _SATURATED: "saturated"}[status]
    if status == _SONIC:
        # V ~ (sqrt3 - theta)/4 and P' -> -P/sqrt3 at the sonic point
        _, dp = ode_rhs(d, th, V, P)
        core = P + dp * (SQRT3 - th)
        theta, Vs, Ps = np.append(theta, SQRT3), np.append(Vs, 0.0), np.append(Ps, core)
    return SelfSimilarProfile(
        d=d, v0=float(v0), h=float(h), theta=theta, V=Vs, P=Ps,
        status=name, bracket=(th, V, P), core_pressure=core,
    )


def fit_shock(profile: SelfSimilarProfile, tol: float = 1e-9) -> ShockFit:
    """Locate the shock inside the bracketing RK4 step and apply the jump relations."""
    if profile.status != "shock":
        raise ShockFitError(f"profile stopped with status {profile.status!r}; no shock bracket")
    d, h = profile.d, profile.h
    th0, V0, P0 = profile.bracket

    def g(tau):
        V, _ = _rk4_step(d, th0, V0, P0, tau)
        return shock_condition(th0 + tau, V)

    g0, g1 = g(0.0), g(h)
    if not (g0 <= 0.0 < g1):
        raise ShockFitError("shock condition does not change sign inside the bracket")
    tau = brentq(g, 0.0, h, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    theta_t = th0 + tau
    v_plus, p_plus = _rk4_step(d, th0, V0, P0, tau)
    residual = abs(shock_condition(theta_t, v_plus))
    if residual > tol:
        raise ShockFitError(f"shock residual {residual:.3e} exceeds {tol:.1e}")
    s = 1.0 / theta_t
    p_minus = p_plus * 3.0 * (1.0 - s * s) / (9.0 * s * s - 1.0)
    fit = ShockFit(theta_t, s, float(v_plus), float(p_plus), float(p_minus), 0.0, float(residual))
    if not (1.0 / 3.0 < s < 1.0 / SQRT3 and 0.0 < p_plus < p_minus):
        raise ShockFitError(f"fitted shock violates the jump inequalities: {fit}")
    return fit


def reference_profile(d: int, v0: float, h: float = 1e-6, **kwargs) -> SelfSimilarProfile:
    """Integrate and, for inflow data, fit the shock; the fit closes the samples."""
    prof = integrate(d, v0, h, **kwargs)
    if v0 > 0:
        return prof
    fit = fit_shock(prof)
    return SelfSimilarProfile(
        d=prof.d, v0=prof.v0, h=prof.h,
        theta=np.append(prof.theta, fit.theta_tilde),
        V=np.append(prof.V, fit.v_plus),
        P=np.append(prof.P, fit.p_plus),
        status=prof.status, bracket=prof.bracket, shock=fit,
    )


def profile_at_time(profile: SelfSimilarProfile, t: float, radii) -> tuple[np.ndarray, np.ndarray]:
    """Pressure and velocity of the similarity solution at time ``t``.

    Behind the shock (``x < s t``) and inside a sonic core (``x < t/sqrt3``)
    the gas is at rest.  Elsewhere ``(P, V)`` is interpolated linearly in
    ``theta = t/x``.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    x = np.asarray(radii, dtype=float)
    if np.any(x < 0):
        raise DomainError("radii must be non-negative")
    if profile.status == "shock" and profile.shock is None:
        raise ShockFitError("inflow profile has no fitted shock; use reference_profile")
    with np.errstate(divide="ignore"):
        theta = t / x
    p = np.interp(theta, profile.theta, profile.P)
    v = np.interp(theta, profile.theta, profile.V)
    inner = theta > profile.theta_max
    if profile.shock is not None:
        p = np.where(inner, profile.shock.p_minus, p)
        v = np.where(inner, 0.0, v)
    elif profile.core_pressure is not None:
        p = np.where(inner, profile.core_pressure, p)
        v = np.where(inner, 0.0, v)
    elif np.any(inner):
        raise DomainError(f"radii below t/theta_max = {t / profile.theta_max:.6g} not covered")
    return p, v


def entropy_check(p_minus: float, u_minus: float, p_plus: float, u_plus: float) -> bool:
    """A discontinuity is admissible iff ``u- > u+``."""
    if not (p_minus > 0 and p_plus > 0):
        raise InvalidStateError("pressures must be positive")
    return bool(u_minus > u_plus)
