"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point lies outside the closed domain or the boundary-extension zone."""


class ConfigError(ValueError):
    """A configuration document is malformed or inconsistent."""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class SchemeError(RuntimeError):
    """The finite-difference stencil lost monotonicity at some node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class NonconvergenceError(RuntimeError):
    """An iterative solve did not reach its tolerance."""

    def __init__(self, message, residual_history=()):
        super().__init__(message)
        self.residual_history = list(residual_history)


class AssumptionViolation(RuntimeError):
    """A structural assumption (e.g. strict boundary monotonicity) failed numerically."""


class CalibrationError(RuntimeError):
    """A doubling-search calibration exhausted its budget."""
