"""Exception hierarchy shared by all modules."""


class IrsSecoptError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(IrsSecoptError):
    """A numerical precondition failed or a backend did not converge."""


class NotHermitian(NumericalError):
    pass


class NotPositiveDefinite(NumericalError):
    pass


class NotPSD(NumericalError):
    pass


class NumericalFailure(NumericalError):
    pass


class ZeroVector(NumericalError):
    pass


class RankTooHigh(NumericalError):
    pass


class LogDomain(NumericalError):
    """Argument of a logarithm was not strictly positive."""


class BracketingFailure(NumericalError):
    pass


class ConfigError(IrsSecoptError, ValueError):
    """Invalid scenario or optimizer configuration."""


class ShapeMismatch(ConfigError):
    pass


class NonPositiveDistance(ConfigError):
    pass


class NonUnitModulus(ConfigError):
    pass


class IndexOutOfRange(ConfigError, IndexError):
    pass


class OutOfRange(ConfigError):
    pass


class BadLevelCount(ConfigError):
    pass
