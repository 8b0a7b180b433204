# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.
"""wpcr-frame-design state validation exceptions."""

from exception import ParameterValidationBaseError


class StateValidationBaseError(ParameterValidationBaseError):
    """Exception raised when a parameter component or the experiment config is invalid."""
