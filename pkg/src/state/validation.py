# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Module for mapping failures of command handlers to exit codes."""

import functools
import logging
import typing

from pydantic import ValidationError

from exception import ComputationBaseError, ParameterValidationBaseError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2


def report_failures(
    handler: typing.Callable[..., int],
) -> typing.Callable[..., int]:
    """Turn the errors of a command handler into exit codes.

    Validation errors exit with EXIT_INVALID, computation errors with EXIT_FAILURE;
    otherwise the handler's own code is returned.

    Args:
        handler: Command handler returning an exit code.

    Returns:
        The wrapped handler.
    """

    @functools.wraps(handler)
    def wrapper(*args: typing.Any, **kwargs: typing.Any) -> int:
        """Run the handler and log failures.

        Args:
            args: handler arguments.
            kwargs: handler keyword arguments.

        Returns:
            The exit code.
        """
        try:
            return handler(*args, **kwargs)
        except (ParameterValidationBaseError, ValidationError) as exc:
            logger.error("Invalid parameters: %s", exc)
            return EXIT_INVALID
        except ComputationBaseError:
            logger.exception("Computation failed")
            return EXIT_FAILURE

    return wrapper
