"""Exception types shared by every module.

All of them derive from ``ValueError`` so callers that only care about
"bad input" can catch one thing.
"""


class CotlarError(ValueError):
    """Base class for argument and domain failures."""


class DomainError(CotlarError):
    """Argument lies outside the set where the quantity is defined."""


class ArgumentError(CotlarError):
    """Malformed argument: unknown kind, bad index, missing parameter."""


class DimensionError(CotlarError):
    """Shapes or dimensions are incompatible."""


class PreconditionError(CotlarError):
    """Input violates a stated precondition (zero mean, skewness, ...)."""


class RangeError(CotlarError):
    """Result would be infinite."""


class ConfigurationError(CotlarError):
    """Simulation configuration cannot produce a valid estimate."""


class StatisticalPowerError(CotlarError):
    """Too few samples for the requested statistical gate."""
