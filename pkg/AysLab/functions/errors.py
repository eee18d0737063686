class AysLabError(Exception):
    """Base class of every error raised on purpose by the lab."""


class ShapeError(AysLabError, ValueError):
    pass


class UsageError(AysLabError, RuntimeError):
    pass


class NumericError(AysLabError, ArithmeticError):
    pass


class DomainError(AysLabError, ValueError):
    pass


class ConfigError(AysLabError, ValueError):
    pass


class IntegrationError(NumericError):
    """ODE step left the admissible state space.

    `diagnostics` carries the state, action, parameters and substep at which the
    solver gave up so the abort record can be written as-is.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics if diagnostics is not None else {}
