"""Exception types shared across the package.

All numerical-precondition failures raise ValueError subclasses so callers
can catch them uniformly; configuration problems get their own branch so the
CLI can map them to exit code 2.
"""


class ConfigError(Exception):
    """Invalid or inconsistent configuration (CLI exit code 2)."""


class DomainError(ValueError):
    """Argument outside the admissible analytic domain."""


class ResolutionError(ValueError):
    """Grid too coarse to resolve the requested scale."""


class PreconditionError(ValueError):
    """A stated operation precondition does not hold for the inputs."""


class RankError(ValueError):
    """Regression system is rank-deficient (collinear regressors)."""
