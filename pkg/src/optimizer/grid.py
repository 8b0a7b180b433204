# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.
"""Exhaustive lattice search."""

import logging
import math
import typing

import numpy as np

import throughput
from exception import DomainError
from state.problem import ProblemSpec

from .optimizer import Optimizer, search_box, to_design

logger = logging.getLogger(__name__)

DEFAULT_STEPS = (0.02, 0.02, 0.02, 1.0)
# Slack on the lattice count so that an upper bound hit by rounding is kept.
LATTICE_SLACK = 1e-9


def lattice_axis(lower: float, upper: float, step: float) -> np.ndarray:
    """Return lower + k·step for k = 0, 1, … while the point stays within upper.

    Args:
        lower: First point.
        upper: Inclusive upper bound.
        step: Spacing.

    Returns:
        The axis; empty when lower exceeds upper.
    """
    if not math.isfinite(lower) or lower > upper:
        return np.empty(0)
    count = math.floor((upper - lower) / step + LATTICE_SLACK)
    return lower + np.arange(count + 1) * step


class GridSearch(Optimizer):
    """Enumerate the lattice of (alpha1, beta, alpha2, Pt in dB) and keep the best point.

    Ties go to the lexicographically smallest tuple: points are visited in
    lexicographic order and only a strictly larger value replaces the incumbent.

    Attrs:
        method: Optimizer tag.
        steps: Lattice spacing of alpha1, beta, alpha2 and Pt (in dB).
    """

    method = "grid"

    def __init__(self, steps: typing.Sequence[float] = DEFAULT_STEPS):
        """Initialize the optimizer.

        Args:
            steps: Lattice spacing of alpha1, beta, alpha2 and Pt (in dB).

        Raises:
            DomainError: unless there are four positive steps.
        """
        if len(steps) != 4 or any(step <= 0.0 for step in steps):
            raise DomainError(f"grid search needs four positive steps, got {steps}")
        self.steps = tuple(float(step) for step in steps)

    def axes(self, spec: ProblemSpec) -> list[np.ndarray]:
        """Return the lattice axes, Pt in dBm.

        Args:
            spec: Problem definition.

        Returns:
            Four axes in search order.
        """
        box = search_box(spec)
        return [
            lattice_axis(lower, upper, step) for (lower, upper), step in zip(box, self.steps)
        ]

    def _search(self, spec: ProblemSpec) -> tuple[typing.Optional[np.ndarray], int]:
        """Evaluate every lattice point, one alpha1 slice at a time.

        Args:
            spec: Problem definition.

        Returns:
            The best lattice point (Pt in W) and the lattice size.
        """
        alpha1_axis, beta_axis, alpha2_axis, power_axis = self.axes(spec)
        evaluations = alpha1_axis.size * beta_axis.size * alpha2_axis.size * power_axis.size
        logger.debug("Grid lattice of %d points", evaluations)
        if not evaluations:
            return None, 0
        mesh = np.meshgrid(beta_axis, alpha2_axis, power_axis, indexing="ij")
        tail = np.stack([axis.ravel() for axis in mesh], axis=1)
        best_value = -np.inf
        best_point = None
        for alpha1 in alpha1_axis:
            design = to_design(spec, np.column_stack([np.full(len(tail), alpha1), tail]))
            values = throughput.objective_batch(spec, design)
            index = int(np.argmax(values))
            if values[index] > best_value:
                best_value = float(values[index])
                best_point = design[index]
        return best_point, evaluations
