"""Exception types shared across the package."""


class HadamardSMError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(HadamardSMError, ValueError):
    """Invalid configuration or construction parameters."""


class DomainError(HadamardSMError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class GridMismatchError(HadamardSMError, ValueError):
    """Fields from different grids were combined."""


class UnsupportedError(HadamardSMError, ValueError):
    """Operation not defined for the given catalog entry."""


class RingConditionError(HadamardSMError, RuntimeError):
    """Mountain-pass geometry could not be verified on the sampled sphere."""
