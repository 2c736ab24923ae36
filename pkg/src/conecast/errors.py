"""Exception types shared across the package.

Every error raised on a contract violation derives from ConecastError so the
CLI can map any failure to a machine-readable JSON record.
"""


class ConecastError(Exception):
    """Base class for all package errors."""

    code = "error"


class InvalidParameterError(ConecastError, ValueError):
    code = "invalid-parameter"


class InvalidConfigError(ConecastError, ValueError):
    code = "invalid-config"


class MemoryBudgetError(ConecastError, RuntimeError):
    code = "memory-budget"


class InsufficientDataError(ConecastError, ValueError):
    code = "insufficient-data"


class EmptyPairSetError(ConecastError, ValueError):
    code = "empty-pair-set"


class NonMultipleLagError(ConecastError, ValueError):
    code = "non-multiple-lag"


class EstimationError(ConecastError, ValueError):
    """Variogram at or past the sill, or a negative parameter estimate."""

    code = "estimation-failure"


class ConstraintViolationError(ConecastError, ValueError):
    """Embedding hyperparameters outside their admissible box."""

    code = "constraint-violation"


class ConeOutOfBoundsError(ConecastError, ValueError):
    """A requested cone does not fit inside the observed lattice."""

    code = "cone-out-of-bounds"


class NoFeasibleSpacingError(ConecastError, ValueError):
    """No sample spacing satisfies the selection rule on the search range."""

    code = "no-feasible-spacing"


class SamplingFailureError(ConecastError, RuntimeError):
    """Acceptance-rejection exceeded its proposal budget."""

    code = "sampling-failure"

    def __init__(self, message, acceptance_rate=None):
        super().__init__(message)
        self.acceptance_rate = acceptance_rate
