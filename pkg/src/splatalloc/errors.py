"""Exception types shared across the package."""


class BudgetRangeError(ValueError):
    """Requested Gaussian budget falls outside the achievable range."""

    def __init__(self, message: str, *, target: int, low: int, high: int):
        super().__init__(message)
        self.target = target
        self.low = low
        self.high = high


class BudgetBelowMinimumError(BudgetRangeError):
    """Budget is smaller than the all-coarse Gaussian count."""


class BudgetAboveMaximumError(BudgetRangeError):
    """Budget exceeds the all-finest Gaussian count."""


class DegenerateBaselineError(ValueError):
    """Camera centers coincide, so no similarity scale can be estimated."""
