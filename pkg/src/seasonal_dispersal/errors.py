"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid model data or arguments; the message names the offending field."""


class ConfigError(ValidationError):
    """Invalid or unknown scenario configuration key/value."""


class SolverError(RuntimeError):
    """A numerical operation failed; carries diagnostic context."""


class EigenConvergenceError(SolverError):
    """Power iteration did not reach the residual tolerance."""

    def __init__(self, message, last_residual, iterations):
        super().__init__(message)
        self.last_residual = last_residual
        self.iterations = iterations


class PositivityError(SolverError):
    """A time step produced a negative entry beyond the undershoot tolerance."""

    def __init__(self, message, node, value, suggested_dt):
        super().__init__(message)
        self.node = node
        self.value = value
        self.suggested_dt = suggested_dt


class BracketError(SolverError):
    """Critical-length bracketing failed to expose a sign change."""


class IterationBudgetError(SolverError):
    """Monotone iteration exhausted its period budget before converging.

    ``slow_near_threshold`` distinguishes the expected slowdown when the
    persistence eigenvalue sits close to zero from a genuine failure.
    """

    def __init__(self, message, gap, periods, slow_near_threshold):
        super().__init__(message)
        self.gap = gap
        self.periods = periods
        self.slow_near_threshold = slow_near_threshold
