"""Exception hierarchy shared across the package.

Every numerical failure carries the name of the subsystem that raised it so
the CLI can surface it in its exit message.
"""


class BeckflowError(Exception):
    """Base class for all package errors."""

    module = "beckflow"


class ConfigError(BeckflowError):
    """Invalid experiment configuration (CLI exit code 2)."""

    module = "cli"


class NumericalError(BeckflowError):
    """Base class for numerical failures (CLI exit code 3)."""


class CompatibilityViolated(NumericalError):
    """Right-hand side of a Neumann problem is not mean-free."""

    module = "poisson"


class NonConvergence(NumericalError):
    """Iteration budget exhausted with the residual above tolerance."""

    module = "poisson"


class PathViolation(NumericalError):
    """A probability path failed positivity or unit-mass validation."""

    module = "path"


class DivisionFloor(NumericalError):
    """A path density dropped below the safe division floor."""

    module = "vectorfield"


class SingularJacobian(NumericalError):
    """det(grad Phi) fell below threshold along a trajectory."""

    module = "flow"


class RankDeficient(NumericalError):
    """Least-squares spline fit has too few samples for the basis."""

    module = "approx"
