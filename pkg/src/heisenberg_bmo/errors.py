class InvalidArgument(ValueError):
    pass


class DivergentIntegral(ArithmeticError):
    """The requested integral is infinite; ``reason`` says why."""

    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


class AccuracyFailure(RuntimeError):
    """Quadrature did not reach tolerance. Carries the best estimate."""

    def __init__(self, message, estimate, error_bound):
        super().__init__(f"{message} (estimate={estimate!r}, error_bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class InternalError(RuntimeError):
    pass


class IntegrabilityWarning(UserWarning):
    pass
