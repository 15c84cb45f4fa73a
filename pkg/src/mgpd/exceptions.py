"""Exception and warning types used across the package."""


class MgpdError(Exception):
    """Base class for all package errors."""


class DomainError(MgpdError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ModelError(MgpdError, ValueError):
    """A model object violates a structural assumption (e.g. G(0) not in (0,1))."""


class ConfigError(MgpdError, ValueError):
    """Invalid configuration of an operation (tolerances, censoring sets, ...)."""


class DataError(MgpdError, ValueError):
    """Data violates a required invariant (empty, non-exceedance rows, ...)."""


class IntegrationError(MgpdError, RuntimeError):
    """Adaptive quadrature failed to converge."""

    def __init__(self, message, subdivisions=None, estimate=None, error=None):
        super().__init__(message)
        self.subdivisions = subdivisions
        self.estimate = estimate
        self.error = error


class UnsupportedModelError(MgpdError):
    """The generator family does not support the requested operation."""


class UnsupportedConversionError(MgpdError):
    """No constructive recipe exists for this representation conversion."""


class UnsupportedEventError(MgpdError):
    """The event cannot be evaluated on the analytic (quadrature) path."""


class EnvelopeViolation(MgpdError, RuntimeError):
    """A rejection-sampling envelope was found below the target density."""

    def __init__(self, message, point=None, ratio=None):
        super().__init__(message)
        self.point = point
        self.ratio = ratio


class MixedShapeError(MgpdError, ValueError):
    """An operation requiring a common shape parameter got unequal shapes."""


class BudgetExceeded(MgpdError, RuntimeError):
    """A sampler exceeded its proposal budget."""


class ChainStuckWarning(UserWarning):
    """MCMC acceptance rate dropped below the stuck threshold."""


class ProbabilityClampWarning(UserWarning):
    """A quadrature-based probability left [0, 1] by more than the clamp slack."""


class CensoredRowWarning(UserWarning):
    """A fully censored row was dropped from a likelihood."""
