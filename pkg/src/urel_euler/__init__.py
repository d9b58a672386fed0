"""Solvers for the ultra-relativistic Euler equations in radial symmetry."""
from .errors import *  # noqa: F401,F403
from .state import (  # noqa: F401
    ConservedPair,
    PrimitiveState,
    RadialField,
    flux_c,
    four_velocity,
    to_conserved,
    to_primitive,
    velocity,
)

__version__ = "0.1.0"
