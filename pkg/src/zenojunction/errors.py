"""Exception types raised by the physics modules."""


class PhysicsError(Exception):
    """Base class for domain errors (mapped to exit code 1 by the CLI)."""

    key = None

    def __init__(self, message, key=None):
        super().__init__(message)
        if key is not None:
            self.key = key


class QuadratureNotConverged(PhysicsError):
    key = "junction"


class GridTooNarrow(PhysicsError):
    key = "solver.span"


class OutOfRange(PhysicsError):
    key = "solver.span"


class DimensionMismatch(PhysicsError):
    key = "solver.cutoff"


class SingularLiouvillian(PhysicsError):
    key = "solver"


class StepSizeUnderflow(PhysicsError):
    key = "solver.dt"


class FitFailed(PhysicsError):
    key = "fit"

    def __init__(self, message, diagnostics=None, key=None):
        super().__init__(message, key=key)
        self.diagnostics = diagnostics or {}
