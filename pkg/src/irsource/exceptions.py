"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class TruncationLimitError(RuntimeError):
    """Adaptive series truncation hit its hard cap before converging."""

    def __init__(self, cap, change):
        self.cap = cap
        self.change = change
        super().__init__(
            f"kernel series did not converge within {cap} modes "
            f"(last doubling changed max |G| by {change:.3e})"
        )


class NumericalFailureError(RuntimeError):
    """A linear solve failed; ``condition`` holds a condition estimate."""

    def __init__(self, message, condition=None):
        self.condition = condition
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)


class StageError(RuntimeError):
    """Wraps a failure inside one stage of an experiment run."""

    def __init__(self, stage, cause, config=None):
        self.stage = stage
        self.cause = cause
        self.config = config
        super().__init__(f"stage '{stage}' failed: {cause}")
