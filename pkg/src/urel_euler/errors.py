"""Exception hierarchy shared by all solvers."""


class UrelError(Exception):
    """Base class for every error raised by :mod:`urel_euler`."""


class InvalidStateError(UrelError, ValueError):
    """A state lies outside the admissible set (non-positive pressure, |v| >= 1, ...)."""


class StateSpaceError(InvalidStateError):
    """A conserved pair violates |b| < a (or |w_bar| < w_energy)."""


class InvalidInitialDataError(InvalidStateError):
    pass


class CFLViolationError(UrelError, ValueError):
    """Grid parameters give a mesh ratio below one."""


class GridGeometryError(UrelError, ValueError):
    pass


class IntegrationError(UrelError, RuntimeError):
    """The self-similar ODE hit its singular curve before the expected event."""


class ShockFitError(UrelError, RuntimeError):
    pass


class DegenerateFrameError(UrelError, ArithmeticError):
    pass


class InsufficientRecordError(UrelError, ValueError):
    pass


class BlowUpError(UrelError, RuntimeError):
    """The finite-volume solver lost positivity beyond what the floor can repair."""


class DomainError(UrelError, ValueError):
    pass
