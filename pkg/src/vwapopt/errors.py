"""Exception hierarchy. ``exit_code`` is what the command-line front end returns."""


class VwapOptError(Exception):
    exit_code = 1


class ConfigError(VwapOptError, ValueError):
    """Invalid parameters or run configuration."""

    exit_code = 1


class ImpactShapeError(VwapOptError, ValueError):
    """An impact function cannot satisfy the shape conditions on g and h."""

    exit_code = 2


class InvalidFamily(ImpactShapeError):
    pass


class NonMonotoneTail(ImpactShapeError):
    pass


class NegativeH(ImpactShapeError):
    pass


class SolverError(VwapOptError, ArithmeticError):
    exit_code = 2


class NoRootAboveKnee(SolverError):
    pass


class BracketFailure(SolverError):
    pass


class ImpactDomainError(VwapOptError, ValueError):
    """Impact evaluated outside its domain (e.g. participation >= 1 for hat-g)."""

    exit_code = 3


class NonPositiveRate(ConfigError):
    pass


class GridMismatch(ConfigError):
    pass


class InvalidPaths(ConfigError):
    pass


class EnumerationTooLarge(VwapOptError):
    exit_code = 4
