# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Parameter component of the matrix completion solver."""

import math
import typing

from pydantic import Field
from pydantic.dataclasses import dataclass


@dataclass(frozen=True)
class CompletionConfig:
    """Singular-value thresholding settings.

    Attributes:
        threshold_tau: Final singular-value shrinkage; zero means "as small as the
            continuation schedule allows".
        step: Step size relative to the inverse squared operator norm.
        max_iter: Iteration cap.
        tol: Relative-change stopping tolerance.
        eps_vec: Optional per-column residual bounds, indexed like the observed columns.
    """

    threshold_tau: float = Field(default=0.0, ge=0)
    step: float = Field(default=1.2, gt=0, lt=2)
    max_iter: int = Field(default=500, ge=1)
    tol: float = Field(default=1e-5, gt=0, lt=1)
    eps_vec: typing.Optional[tuple[float, ...]] = None

    @classmethod
    def for_noise(
        cls, n: int, J: int, sigma: float, **overrides: typing.Any
    ) -> "CompletionConfig":
        """Build the default configuration for an n×J matrix with noise level σ.

        Args:
            n: Rows of the spectrum matrix.
            J: Columns of the spectrum matrix.
            sigma: Noise standard deviation per entry.
            overrides: Any field to set explicitly.

        Returns:
            CompletionConfig: threshold_tau = 5·√(nJ)·σ unless overridden.
        """
        settings: dict[str, typing.Any] = {"threshold_tau": 5.0 * math.sqrt(n * J) * sigma}
        settings.update(overrides)
        return cls(**settings)
