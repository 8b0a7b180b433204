# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.
"""Uniform random sampling of the design box."""

import logging
import typing

import numpy as np

from exception import DomainError
from mathkit import Rng
from state.problem import ProblemSpec

from .optimizer import Optimizer, canonical_batch, search_box, to_design

logger = logging.getLogger(__name__)


def draw_box(spec: ProblemSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw design rows uniformly from the search box (Pt uniform in dBm).

    The draw is a single (count, 4) block, so the first k rows of a larger draw equal
    a draw of k rows from the same stream.

    Args:
        spec: Problem definition.
        count: Number of rows.
        rng: Random stream.

    Returns:
        (count, 4) design rows with Pt in W.
    """
    box = search_box(spec)
    unit = rng.uniform(size=(count, 4))
    return to_design(spec, box[:, 0] + unit * (box[:, 1] - box[:, 0]))


class RandomSampling(Optimizer):
    """Best of Z uniformly drawn tuples.

    Attrs:
        method: Optimizer tag.
        samples: Number of drawn tuples Z.
        rng: Random stream of the draws.
    """

    method = "random"

    def __init__(self, samples: int, rng: Rng):
        """Initialize the optimizer.

        Args:
            samples: Number of drawn tuples Z.
            rng: Random stream of the draws.

        Raises:
            DomainError: if samples < 1.
        """
        if samples < 1:
            raise DomainError(f"random sampling needs at least one sample, got {samples}")
        self.samples = samples
        self.rng = rng

    def _search(self, spec: ProblemSpec) -> tuple[typing.Optional[np.ndarray], int]:
        """Draw, canonicalise and score every sample.

        Args:
            spec: Problem definition.

        Returns:
            The best canonical sample and the number of samples.
        """
        if search_box(spec)[1, 0] > 1.0:
            return None, self.samples
        design, values = canonical_batch(
            spec, draw_box(spec, self.samples, self.rng.generator())
        )
        feasible = int(np.count_nonzero(np.isfinite(values)))
        logger.debug("%d of %d random samples are feasible", feasible, self.samples)
        if not feasible:
            return None, self.samples
        return design[int(np.argmax(values))], self.samples
