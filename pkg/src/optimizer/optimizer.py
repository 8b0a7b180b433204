# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.
"""Generic frame design optimizer."""

import abc
import logging
import math
import typing

import numpy as np

import mathkit
import throughput
from state.problem import DesignTuple, ProblemSpec

logger = logging.getLogger(__name__)


class OptResult(typing.NamedTuple):
    """Outcome of an optimizer run.

    Attributes:
        best: Best design tuple found, None when nothing feasible was found.
        value: Objective at best, re-evaluated with the scalar objective (nan if none).
        evaluations: Objective evaluations spent.
        method: Optimizer tag.
        feasible: Whether best is a feasible design.
    """

    best: typing.Optional[DesignTuple]
    value: float
    evaluations: int
    method: str
    feasible: bool


def search_box(spec: ProblemSpec) -> np.ndarray:
    """Return the (4, 2) box of (alpha1, beta, alpha2, Pt in dBm).

    Args:
        spec: Problem definition.

    Returns:
        Lower and upper bound per variable; the beta row is empty (lower > upper) when
        the sample constraint cannot be met.
    """
    return np.array(
        [
            [0.0, 1.0],
            [throughput.beta_lower_bound(spec), 1.0],
            [spec.alpha2_min, 1.0],
            [mathkit.watt_to_dbm(spec.Pt_min), mathkit.watt_to_dbm(spec.Pt_max)],
        ]
    )


def to_design(spec: ProblemSpec, box_points: np.ndarray) -> np.ndarray:
    """Convert rows of (alpha1, beta, alpha2, Pt in dBm) into design rows with Pt in W."""
    design = np.array(box_points, dtype=float, ndmin=2)
    design[:, 3] = np.clip(mathkit.dbm_to_watt(design[:, 3]), spec.Pt_min, spec.Pt_max)
    return design


def canonical_batch(spec: ProblemSpec, design: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Move third-slot time above alpha2_min into the first slot where it does not hurt.

    Args:
        spec: Problem definition.
        design: (N, 4) design rows.

    Returns:
        The canonical rows and their objective values (-inf where infeasible).
    """
    values = throughput.objective_batch(spec, design)
    shifted = design.copy()
    shifted[:, 0] = design[:, 0] + design[:, 2] - spec.alpha2_min
    shifted[:, 2] = spec.alpha2_min
    shifted_values = throughput.objective_batch(spec, shifted)
    better = np.isfinite(shifted_values) & (shifted_values >= values)
    return np.where(better[:, np.newaxis], shifted, design), np.where(
        better, shifted_values, values
    )


class Optimizer(typing.Protocol):
    """Abstract base class of a frame design optimizer."""

    method: str

    @abc.abstractmethod
    def _search(self, spec: ProblemSpec) -> tuple[typing.Optional[np.ndarray], int]:
        """Abstract method to search for the best design.

        Args:
            spec: Problem definition.
        """

    def optimize(self, spec: ProblemSpec) -> OptResult:
        """Search the design space and return a canonical, re-evaluated best tuple.

        Args:
            spec: Problem definition.

        Returns:
            OptResult: the result; feasible is False when no feasible tuple was found.
        """
        candidate, evaluations = self._search(spec)
        if candidate is None:
            logger.warning("%s search found no feasible design", self.method)
            return OptResult(None, math.nan, evaluations, self.method, False)
        design, _ = canonical_batch(spec, np.asarray(candidate, dtype=float)[np.newaxis, :])
        best = DesignTuple.from_array(design[0])
        value = throughput.objective(spec)(best)
        logger.info(
            "%s optimum %.6g at %s after %d evaluations", self.method, value, best, evaluations
        )
        return OptResult(best, value, evaluations, self.method, True)
