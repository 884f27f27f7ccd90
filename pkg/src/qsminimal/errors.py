"""Exception hierarchy.

Every error carries the CLI exit code it maps to: 2 for configuration and
consistency problems, 3 for degenerate mathematics, 4 for precision loss.
"""


class QsMinimalError(Exception):
    exit_code = 1


class ConfigError(QsMinimalError, ValueError):
    exit_code = 2


class ConsistencyError(ConfigError):
    """Relative gaps and ratios at some level do not sum to one."""

    def __init__(self, level, residual):
        self.level = level
        self.residual = residual
        super().__init__(
            f"level {level}: sum(e) + n*c - 1 = {residual} (must be exactly 0)"
        )


class RangeError(ConfigError):
    pass


class DepthError(ConfigError, IndexError):
    pass


class CapacityError(ConfigError):
    pass


class DomainError(ConfigError):
    pass


class GeometryError(ConfigError):
    pass


class ChainError(ConfigError, KeyError):
    pass


class DegenerateError(QsMinimalError, ArithmeticError):
    exit_code = 3


class PrecisionError(QsMinimalError, ArithmeticError):
    exit_code = 4
