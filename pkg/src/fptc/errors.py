class InstanceError(ValueError):
    """Malformed or unsupported problem instance."""


class DegenerateMetric(InstanceError):
    pass


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed its configured budget."""

    def __init__(self, message, count):
        super().__init__(f"{message}: {count}" if count is not None else message)
        self.count = count


class TooLargeError(RuntimeError):
    """Instance is too large for an exhaustive check."""
