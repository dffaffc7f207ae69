"""Exception hierarchy, grouped by CLI exit code class."""


class GarchTailsError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(GarchTailsError):
    """Bad configuration: unparseable model file, invalid parameters."""

    exit_code = 2


class InvalidDof(ConfigError):
    """Degrees of freedom must exceed 2 for the t-family innovations."""


class NonPositiveVariance(ConfigError):
    """The (nu, xi) pair does not admit a positive standardising scale."""


class DimensionError(ConfigError):
    """Model orders imply an empty state vector."""


class NumericalError(GarchTailsError):
    """Numerical failure: overflow, diverging moment estimate."""

    exit_code = 3


class ExplosionError(NumericalError):
    """Simulated volatility exceeded the overflow guard."""


class MomentDiverged(NumericalError):
    """A Monte Carlo moment estimate failed its tail-stability check."""


class NonConvergenceError(GarchTailsError):
    """Iterative scheme failed to converge within its budget."""

    exit_code = 4


class ConvergenceError(NonConvergenceError):
    """Eigenvalue iteration did not reach tolerance."""


class NoConvergence(NonConvergenceError):
    """Particle ensemble did not stabilise within the iteration cap."""


class NoCrossing(NonConvergenceError):
    """The moment curve never crossed 1 on the searched interval."""


class RejectionStall(NonConvergenceError):
    """Tail-chain rejection sampler acceptance rate collapsed."""


class DegenerateWeights(NumericalError):
    """Particle effective sample size fell below the configured floor."""


class TooFewParticles(NumericalError):
    """Empirical initialisation retained too few exceedance angles."""


class NoExceedances(NumericalError):
    """No observations above the requested threshold."""
