"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`UqkitError`.
Two families matter to callers of the command line: bad input
(:class:`ConfigError` and the ``ValueError`` subclasses) and numerical
trouble (:class:`NumericalInstabilityError`).
"""


class UqkitError(Exception):
    """Base class for all package errors."""


class ConfigError(UqkitError, ValueError):
    """Invalid configuration or parameter range."""


class SizeError(ConfigError):
    pass


class DegenerateSampleError(UqkitError, ValueError):
    """Samples without spread where a spread is required."""


class DomainError(ConfigError):
    pass


class NormalizationError(UqkitError, ValueError):
    pass


class GridMismatchError(UqkitError, ValueError):
    pass


class DivergenceError(UqkitError, ValueError):
    """Relative entropy is infinite; clip and renormalize the model density first."""


class InvalidThresholdError(ConfigError):
    pass


class SingularMatrixError(UqkitError, ValueError):
    pass


class RankError(SingularMatrixError):
    pass


class SymmetryError(UqkitError, ValueError):
    """Fourier coefficients violate the reality (conjugate) condition."""


class WindowError(ConfigError):
    pass


class StationarityError(UqkitError, ValueError):
    pass


class CalibrationError(UqkitError, ValueError):
    pass


class NumericalInstabilityError(UqkitError, ArithmeticError):
    pass


class BlowUpError(NumericalInstabilityError):
    """State left the finite range during time integration."""


class InstabilityError(NumericalInstabilityError):
    """Filter covariance lost positive semi-definiteness."""
