"""Exception and warning types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid device, drive, grid, or sweep configuration."""


class ConvergenceError(RuntimeError):
    """A numerical routine could not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class BranchBrokenError(RuntimeError):
    """A requested quantity depends on a branch that lost adiabatic continuity."""


class UnsupportedError(ValueError):
    """The requested quantity is not defined for this truncation."""


class NonQuadraticRegimeError(ValueError):
    """Stark shifts on the supplied grid are not quadratic in the drive amplitude."""


class SingularError(ArithmeticError):
    """A formula denominator vanishes (straddling detuning)."""


class DispersiveValidityWarning(UserWarning):
    """Parameters sit outside the regime where an approximate formula holds."""
