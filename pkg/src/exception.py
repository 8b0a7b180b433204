# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.
"""wpcr-frame-design base exceptions."""


class ParameterValidationBaseError(Exception):
    """Exception raised when model parameter validation failed."""


class ComputationBaseError(Exception):
    """Exception raised when a numerical computation cannot produce a result."""


class DomainError(ComputationBaseError, ValueError):
    """Exception raised when an argument lies outside the domain of an operation."""


class DegenerateFrameError(DomainError):
    """Exception raised when a frame split leaves a zero-length slot that a formula divides by."""


class InfeasibleSensingError(DomainError):
    """Exception raised when the sensing slot cannot fund a single Nyquist sample."""


class DimensionMismatchError(ComputationBaseError, ValueError):
    """Exception raised when array shapes do not agree."""


class NumericalFailureError(ComputationBaseError):
    """Exception raised when a dense linear-algebra kernel fails to converge."""


class InfeasibleDesignError(ComputationBaseError):
    """Exception raised when an objective is evaluated on an infeasible design tuple."""

    def __init__(self, violations: tuple[str, ...]):
        """Initialize the error.

        Args:
            violations: Names of the violated constraints.
        """
        super().__init__(f"infeasible design, violated constraints: {', '.join(violations)}")
        self.violations = violations
