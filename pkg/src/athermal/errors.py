"""Exception hierarchy shared by every module."""


class AthermalError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(AthermalError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class ShapeError(AthermalError, ValueError):
    """Dimensions of the inputs do not fit together."""


class SizeError(ShapeError):
    """A tensor product would exceed the configured dimension cap."""


class ValidityError(AthermalError, ValueError):
    """An object fails a structural check (Hermiticity, unitarity, PSD, ...)."""


class CPTPError(ValidityError):
    """A map is not completely positive and trace preserving."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class EffectError(ValidityError):
    """An operator meant as a POVM effect is not between 0 and the identity."""


class ConvergenceError(AthermalError, RuntimeError):
    """An iterative numerical routine failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SolverError(AthermalError, RuntimeError):
    """The SDP solver did not return an optimal certificate."""

    def __init__(self, message, status=None, duality_gap=None):
        super().__init__(message)
        self.status = status
        self.duality_gap = duality_gap
