"""Exception hierarchy shared by the numerical core and the CLI."""


class HgateError(Exception):
    """Base class for every error raised by the package."""


class NotHermitian(HgateError):
    """A generator or operator failed the hermiticity check."""


class DomainError(HgateError, ValueError):
    """A parameter lies outside the domain an operation accepts."""


class DegenerateCoupling(HgateError):
    """The block coupling xi is too small for the k/mu parameterization."""


class UnitarityViolation(HgateError):
    """Block coefficients do not satisfy beta1^2 + beta2^2 = 1."""


class NoConvergence(HgateError):
    """The step-halved integration disagrees with the base run."""


class StepBudgetExceeded(HgateError):
    """An integration would need more steps than the configured budget."""


class NormDriftExceeded(HgateError):
    """Column norms of an integrated propagator drifted beyond tolerance."""


class ConfigError(HgateError, ValueError):
    """A config file or flag value could not be understood."""


class GridTooLarge(HgateError, ValueError):
    """A sweep grid exceeds the configured point cap."""
