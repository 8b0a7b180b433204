# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.
"""Multi-start derivative-free local search."""

import logging
import typing

import numpy as np
from scipy import optimize

import mathkit
import throughput
from exception import DomainError
from mathkit import Rng
from state.problem import DesignTuple, ProblemSpec

from .optimizer import Optimizer, search_box, to_design
from .random_sampling import draw_box

logger = logging.getLogger(__name__)

DEFAULT_STARTS = 20
DEFAULT_BUDGET = 400
# Objective of an infeasible point: this plus the violation amount, far above -tau.
PENALTY = 1e3
# Draws per requested start when looking for feasible random starts.
DRAWS_PER_START = 50


class LocalSearch(Optimizer):
    """Bounded Nelder-Mead from several starts; the slot constraint is a penalty.

    Each run keeps its result only when it is feasible and strictly better than its
    start, so the returned value is never below the best feasible start.

    Attrs:
        method: Optimizer tag.
        starts: Explicit start tuples, or None for random feasible starts.
        count: Number of random starts.
        budget: Objective evaluations per start.
        rng: Random stream of the random starts.
    """

    method = "local"

    def __init__(
        self,
        starts: typing.Optional[typing.Sequence[DesignTuple]] = None,
        count: int = DEFAULT_STARTS,
        budget: int = DEFAULT_BUDGET,
        rng: typing.Optional[Rng] = None,
    ):
        """Initialize the optimizer.

        Args:
            starts: Explicit start tuples; random feasible starts when None.
            count: Number of random starts.
            budget: Objective evaluations per start.
            rng: Random stream, required when starts is None.

        Raises:
            DomainError: on an empty start list, a non-positive budget or a missing rng.
        """
        if starts is not None and not starts:
            raise DomainError("local search needs at least one start")
        if starts is None and rng is None:
            raise DomainError("random starts need a random stream")
        if budget < 1 or count < 1:
            raise DomainError(f"need budget >= 1 and count >= 1, got {budget}, {count}")
        self.starts = list(starts) if starts is not None else None
        self.count = count
        self.budget = budget
        self.rng = rng

    def _start_points(self, spec: ProblemSpec) -> np.ndarray:
        """Return start rows with Pt in W."""
        if self.starts is not None:
            return np.array([start.as_array() for start in self.starts])
        if search_box(spec)[1, 0] > 1.0:
            return np.empty((0, 4))
        rng = typing.cast(Rng, self.rng).generator()
        draws = draw_box(spec, self.count * DRAWS_PER_START, rng)
        return draws[throughput.feasible_mask(spec, draws)][: self.count]

    def _search(self, spec: ProblemSpec) -> tuple[typing.Optional[np.ndarray], int]:
        """Run one bounded simplex search per feasible start.

        Args:
            spec: Problem definition.

        Returns:
            The best point and the objective evaluations spent.
        """
        box = search_box(spec)
        bounds = optimize.Bounds(box[:, 0], np.maximum(box[:, 0], box[:, 1]))

        def penalized(point: np.ndarray) -> float:
            design = to_design(spec, point)
            value = float(throughput.objective_batch(spec, design)[0])
            if np.isfinite(value):
                return -value
            return PENALTY * (1.0 + throughput.violation_amount(spec, design[0]))

        starts = self._start_points(spec)
        start_values = throughput.objective_batch(spec, starts) if len(starts) else np.empty(0)
        evaluations = len(starts)
        best_value, best_point = -np.inf, None
        for start, start_value in zip(starts, start_values):
            if not np.isfinite(start_value):
                logger.debug("Skipping infeasible start %s", start)
                continue
            if start_value > best_value:
                best_value, best_point = float(start_value), start
            x0 = np.clip(
                np.append(start[:3], mathkit.watt_to_dbm(start[3])), bounds.lb, bounds.ub
            )
            result = optimize.minimize(
                penalized,
                x0,
                method="Nelder-Mead",
                bounds=bounds,
                options={"maxfev": self.budget, "xatol": 1e-7, "fatol": 1e-12},
            )
            evaluations += int(result.nfev)
            if -result.fun > best_value and result.fun < 0.0:
                candidate = to_design(spec, result.x)[0]
                value = float(throughput.objective_batch(spec, candidate)[0])
                evaluations += 1
                if value > best_value:
                    best_value, best_point = value, candidate
        return best_point, evaluations
