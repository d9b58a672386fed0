"""State space of the radial ultra-relativistic Euler system.

The radial unknowns are the pressure ``p > 0`` and the radial component ``u``
of the spatial four-velocity.  The scheme evolves the conserved pair

    a = p (3 + 4 u^2),    b = 4 p u sqrt(1 + u^2),

which always satisfies ``|b| < a``.  The momentum flux expressed in ``(a, b)``
is ``c(a, b) = (5a - 2 sqrt(4a^2 - 3b^2)) / 3``, which equals ``p (1 + 4u^2)``.

Scalar entry points validate their input and raise; the ``*_arrays`` helpers are
the unchecked vectorised kernels used inside the solvers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidStateError, StateSpaceError

__all__ = [
    "PrimitiveState",
    "ConservedPair",
    "RadialField",
    "to_conserved",
    "to_primitive",
    "flux_c",
    "velocity",
    "four_velocity",
    "conserved_arrays",
    "pressure_arrays",
    "primitive_arrays",
    "flux_c_arrays",
]


@dataclass(frozen=True)
class PrimitiveState:
    p: float
    u: float

    @property
    def v(self) -> float:
        return velocity(self.u)


@dataclass(frozen=True)
class ConservedPair:
    a: float
    b: float


@dataclass
class RadialField:
    """Samples of ``a(t, .)`` and ``b(t, .)`` on increasing radii."""

    positions: np.ndarray
    a: np.ndarray
    b: np.ndarray
    time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if not (self.positions.shape == self.a.shape == self.b.shape):
            raise ValueError("positions, a and b must have the same shape")
        if self.positions.size > 1 and np.any(np.diff(self.positions) <= 0):
            raise ValueError("positions must be strictly increasing")
        if self.time < 0:
            raise ValueError("time must be non-negative")
        if not np.all(np.abs(self.b) < self.a):
            raise StateSpaceError("field contains states with |b| >= a")

    def primitive(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(p, v)`` at every position."""
        p, u = primitive_arrays(self.a, self.b)
        return p, u / np.sqrt(1.0 + u * u)


# -- vectorised kernels (no validation) -------------------------------------


def conserved_arrays(p, u):
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    return p * (3.0 + 4.0 * u * u), 4.0 * p * u * np.sqrt(1.0 + u * u)


def pressure_arrays(a, b):
    # (a^2 - b^2) / (a + sqrt(4a^2 - 3b^2)) is the inverse map without the
    # cancellation in sqrt(4a^2 - 3b^2) - a; positive whenever |b| < a.
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (a - b) * (a + b) / (a + np.sqrt(4.0 * a * a - 3.0 * b * b))


def primitive_arrays(a, b):
    p = pressure_arrays(a, b)
    return p, b / np.sqrt(4.0 * p * (p + a))


def flux_c_arrays(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (5.0 * a - 2.0 * np.sqrt(4.0 * a * a - 3.0 * b * b)) / 3.0


# -- checked scalar API -----------------------------------------------------


def _check_pair(c: ConservedPair) -> None:
    if not (np.isfinite(c.a) and np.isfinite(c.b)) or not abs(c.b) < c.a:
        raise StateSpaceError(f"conserved pair outside |b| < a: a={c.a!r}, b={c.b!r}")


def to_conserved(s: PrimitiveState) -> ConservedPair:
    if not s.p > 0 or not np.isfinite(s.p) or not np.isfinite(s.u):
        raise InvalidStateError(f"pressure must be positive and finite, got p={s.p!r}")
    a, b = conserved_arrays(s.p, s.u)
    return ConservedPair(float(a), float(b))


def to_primitive(c: ConservedPair) -> PrimitiveState:
    _check_pair(c)
    p = float(pressure_arrays(c.a, c.b))
    if c.b == 0.0:
        return PrimitiveState(p, 0.0)
    denom = 4.0 * p * (p + c.a)
    if not p > 0 or denom == 0.0:
        raise InvalidStateError(f"pressure underflow while inverting a={c.a!r}, b={c.b!r}")
    return PrimitiveState(p, c.b / np.sqrt(denom))


def flux_c(c: ConservedPair) -> float:
    _check_pair(c)
    return float(flux_c_arrays(c.a, c.b))


def velocity(u):
    """Physical speed ``v = u / sqrt(1 + u^2)``; works on scalars and arrays."""
    u = np.asarray(u, dtype=float)
    v = u / np.sqrt(1.0 + u * u)
    return float(v) if v.ndim == 0 else v


def four_velocity(v):
    """Inverse of :func:`velocity`; requires ``|v| < 1``."""
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(v) >= 1.0):
        raise InvalidStateError("velocity must satisfy |v| < 1")
    u = v / np.sqrt((1.0 - v) * (1.0 + v))
    return float(u) if u.ndim == 0 else u
