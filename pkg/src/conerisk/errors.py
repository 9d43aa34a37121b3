"""Exception types shared across the package."""


class ConeRiskError(Exception):
    """Base class for all package errors."""


class InvalidInputError(ConeRiskError, ValueError):
    """An argument violates an operation's precondition."""


class NotInConeError(InvalidInputError):
    """A sequence fails the cone's defining inequalities."""


class NotMonotoneError(InvalidInputError):
    """A sequence required to be nondecreasing is not."""


class NonConvergence(ConeRiskError):
    """An iterative projection hit its iteration cap.

    The partial result is attached so callers can still inspect it.
    """

    def __init__(self, message, result=None, replicate=None):
        super().__init__(message)
        self.result = result
        self.replicate = replicate


class HypothesisViolated(ConeRiskError):
    """A theorem's side condition does not hold for the given input."""

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        msg = f"hypothesis violated: {condition}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
