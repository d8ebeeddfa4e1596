"""Exception types shared across the package."""


class LabError(Exception):
    """Base class for all errors raised by contractlab."""


class SpecError(LabError, ValueError):
    """A group specification or configuration is malformed."""


class BudgetExceeded(LabError):
    """A resource cap was hit; ``partial`` carries whatever was counted so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InvariantViolation(LabError):
    """A cross-check between two independent routes disagreed."""

    def __init__(self, message, data=None):
        super().__init__(message)
        self.data = data


class MalformedDecomposition(LabError, ValueError):
    pass


class PreconditionError(LabError, ValueError):
    pass
