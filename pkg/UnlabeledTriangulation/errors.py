"""
Exception hierarchy of the package.

Every error carries a human readable message and a ``details`` dict with
the measured quantities (kernel dimensions, residuals, determinants) that
led to it, so front ends can report them without parsing messages.
"""

EXIT_SUCCESS = 0
EXIT_ASSERTION_FAILURE = 2
EXIT_DEGENERATE_INPUT = 3
EXIT_BUDGET_EXCEEDED = 4


class UnlabeledTriangulationError(Exception):
    """Base class of all package errors."""

    exit_code = EXIT_DEGENERATE_INPUT

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        payload = {"error": type(self).__name__, "message": self.message}
        payload.update(self.details)
        return payload


class DegenerateInputError(UnlabeledTriangulationError, ValueError):
    """Input lies in a degenerate locus (zero vectors, coincident points)."""


class InvalidCameraError(DegenerateInputError):
    """Camera matrix is not a 3x4 matrix of rank 3."""


class UndefinedProjectionError(DegenerateInputError):
    """A world point coincides with the focal point of the camera."""


class DegenerateProjectionError(DegenerateInputError):
    """The lifted image of a configuration is numerically zero."""


class AmbiguousTriangulationError(DegenerateInputError):
    """The data admits more than one reconstruction."""


class NotSplittableError(DegenerateInputError):
    """A symmetric matrix does not have rank 2."""


class ComplexPairError(NotSplittableError):
    """A rank-2 symmetric matrix is definite, so its points are complex."""


class OffVarietyError(DegenerateInputError):
    """The observations are inconsistent with every reconstruction."""


class DegenerateConfigurationError(DegenerateInputError):
    """The stacked system has a kernel of dimension greater than one."""


class UnsupportedConfigurationError(DegenerateConfigurationError):
    """Number of views is too small for the configuration order."""


class InconsistentDataError(DegenerateInputError):
    """The kernel vector assigns zero scale to every view."""


class PreconditionError(DegenerateInputError):
    """Inputs violate the preconditions of the operation."""


class DegenerateRigError(DegenerateInputError):
    """Random sampling on the rig is rejected too often."""


class ShapeError(UnlabeledTriangulationError, ValueError):
    """Vector or matrix has the wrong shape, length or order."""


class OutOfRangeError(UnlabeledTriangulationError, ValueError):
    """Index or count outside of the supported range."""


class InvalidPairError(UnlabeledTriangulationError, ValueError):
    """A pairwise object was requested for a camera with itself."""


class BudgetExceededError(UnlabeledTriangulationError):
    """Enumeration would exceed the configured budget."""

    exit_code = EXIT_BUDGET_EXCEEDED


class UnreliableRankError(UnlabeledTriangulationError):
    """Singular value gap is too small to decide a numerical rank."""

    exit_code = EXIT_ASSERTION_FAILURE


def exit_code_for(exc):
    """
    Map an exception to the exit code of the command line tool.

    Args:
        exc (BaseException): The raised exception.

    Returns:
        int: 2, 3 or 4 for package errors. Other exceptions return None and
            are expected to propagate.
    """
    if isinstance(exc, UnlabeledTriangulationError):
        return exc.exit_code
    return None
