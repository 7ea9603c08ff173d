"""Exception types shared across the package."""


class WfrLabError(Exception):
    """Base class for all errors raised by wfr_split_lab."""


class NumericInputError(WfrLabError, ValueError):
    """Input contains NaN/Inf or is otherwise not a usable numeric array."""


class DimensionError(WfrLabError, ValueError):
    """Shapes or dimensions of the inputs do not match."""


class SingularMatrixError(WfrLabError, ValueError):
    """A matrix required to be (strictly) positive definite is not."""


class SingularConfigurationError(WfrLabError, RuntimeError):
    """An inner resolvent of a closed-form evolution map is singular."""

    def __init__(self, message: str, offending_eigenvalue: float | None = None):
        if offending_eigenvalue is not None:
            message = f"{message} (offending eigenvalue {offending_eigenvalue:.6e})"
        super().__init__(message)
        self.offending_eigenvalue = offending_eigenvalue


class StepSizeError(WfrLabError, RuntimeError):
    """A time step violates a stability or positivity requirement."""


class DegenerateDensityError(WfrLabError, RuntimeError):
    """A grid density underflowed to zero everywhere."""


class GridMismatchError(WfrLabError, ValueError):
    """Two grid fields do not share the same grid."""


class ConsistencyError(WfrLabError, RuntimeError):
    """A quantity violates a sanity bound by more than round-off allows."""


class AssumptionViolationError(WfrLabError, ValueError):
    """The strong-convexity assumptions on the initial/target pair fail."""


class TheoremConditionError(WfrLabError, ValueError):
    """The admissibility condition for the uniform log-concavity bound fails."""


class DegenerateRatioError(WfrLabError, ValueError):
    """The asymptotic KL ratio is 0/0 for the given initial data."""


class ConfigError(WfrLabError, ValueError):
    """Command line / config file input could not be parsed or validated."""
