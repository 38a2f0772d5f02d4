"""
Exception types raised by qsim.

All of them derive from ValueError so callers that only guard against bad
input keep working.
"""

from typing import Optional


class QSimError(ValueError):
    """Base class for every qsim error."""


class ValidationError(QSimError):
    """A parameter lies outside its documented domain."""

    def __init__(self, parameter: str, message: str):
        self.parameter = parameter
        super().__init__(f"{parameter}: {message}")


class DimensionError(QSimError):
    """Qubit counts, targets or operator sizes do not fit together."""


class ImpossibleBranchError(QSimError):
    """A measurement branch has (numerically) zero probability."""


class InfeasibleParameterError(QSimError):
    """The optimal post-weak measurement strength falls outside [0, 1]."""

    def __init__(self, message: str, value: Optional[float] = None):
        self.value = value
        super().__init__(message)


class UndefinedCaseError(QSimError):
    """A teleportation case cannot be parameterized at the given (x, s)."""


class VerificationFailure(QSimError):
    """One or more acceptance criteria failed."""

    def __init__(self, failed_ids):
        self.failed_ids = list(failed_ids)
        super().__init__(f"failed criteria: {', '.join(self.failed_ids)}")
