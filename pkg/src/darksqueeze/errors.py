"""Exception hierarchy shared by all darksqueeze modules."""


class DarkSqueezeError(Exception):
    """Base class for all library errors."""


class ConfigError(DarkSqueezeError, ValueError):
    """Invalid user input or configuration.

    Parameters
    ----------
    message : str
        Human readable description.
    field : str, optional
        Dotted path of the offending configuration field.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class PoleError(DarkSqueezeError, ZeroDivisionError):
    """A denominator fell below its configured floor.

    The offending quantity is stored in ``quantity`` so callers (and the
    region map) can report which denominator vanished.
    """

    def __init__(self, quantity, value):
        super().__init__(f"near-zero denominator {quantity} = {value!r}")
        self.quantity = quantity
        self.value = value


class GainMediumError(DarkSqueezeError):
    """Im K0 <= 0: absorption length undefined."""


class ResolutionError(DarkSqueezeError):
    """A sampled function is not resolved by its grid."""


class QuadratureError(DarkSqueezeError):
    """A quadrature did not converge to the requested tolerance."""


class KFloorError(DarkSqueezeError, ValueError):
    """A wavenumber is inside the excluded window around k = 0."""


class LinearizationError(DarkSqueezeError):
    """The linear fluctuation model left its validity range."""


class StepSizeError(DarkSqueezeError, ValueError):
    """Propagation step too large for the split-step accuracy contract."""


class CertificationError(DarkSqueezeError):
    """One or more numerical certification checks failed."""
