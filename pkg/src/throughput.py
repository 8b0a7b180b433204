# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Throughput objectives and the feasibility region of the frame design problems.

Every objective is available in two forms: a scalar form taking a DesignTuple, which
refuses infeasible tuples, and a batch form over arrays of (alpha1, beta, alpha2, Pt)
used by the optimizers, which scores infeasible entries as -inf.
"""

import dataclasses
import logging
import math
import typing

import numpy as np

import mathkit
from completion import cs_sample_bound, mc_sample_bound
from exception import DomainError, InfeasibleDesignError
from sensing import pf_analytic, qf_analytic
from state.problem import DesignTuple, ProblemSpec, Variant
from state.wpt import SLOT_TOLERANCE
from wpt import Kind, mu_values, outage_closed_form

logger = logging.getLogger(__name__)

# A sensing window must hold at least this many Nyquist-equivalent samples.
MIN_WINDOW_SAMPLES = 2
BATCH_SIZE = 1 << 16

CONSTRAINTS = ("C1", "C2", "C3", "C4", "C5", "C6")


class Feasibility(typing.NamedTuple):
    """Constraint check of a design tuple.

    Attributes:
        ok: Whether every constraint holds.
        violations: Names of the violated constraints, in order.
    """

    ok: bool
    violations: tuple[str, ...]


def tau_transmission(Pt: mathkit.ArrayOrFloat, N0: float) -> mathkit.ArrayOrFloat:
    """Spectral efficiency log₂(1 + Pt/N0) of the data link.

    Args:
        Pt: Transmit power in W.
        N0: Noise power in W.

    Returns:
        The rate in bits/s/Hz.

    Raises:
        DomainError: if N0 <= 0 or Pt < 0.
    """
    if N0 <= 0.0:
        raise DomainError(f"N0 must be positive, got {N0}")
    power = np.asarray(Pt, dtype=float)
    if np.any(power < 0.0):
        raise DomainError(f"Pt must be >= 0, got {Pt!r}")
    return mathkit.as_output(np.log2(1.0 + power / N0))


def _sensing_constraint(variant: Variant) -> str:
    return "C2" if variant == "p0" else "C6"


def beta_lower_bound(spec: ProblemSpec, variant: typing.Optional[Variant] = None) -> float:
    """Smallest sensing fraction β allowed by the sample-count constraint.

    p0: e_s·ceil(C_cs·K·ln(n/K))/(κ·T·Ps). p1: e_s·m/(κ·T·Ps·J1) with m the observation
    bound of spec.bound_mode. Either bound is raised to the β funding MIN_WINDOW_SAMPLES
    Nyquist samples. The bound is +inf when the sample requirement cannot be met at all.

    Args:
        spec: Problem definition.
        variant: Constraint set to use; spec.variant by default.

    Returns:
        The lower bound on β.
    """
    variant = variant or spec.variant
    funded = spec.kappa * spec.T * spec.Ps / spec.sensing.e_s
    try:
        if variant == "p0":
            required = cs_sample_bound(spec.n, spec.K_eff, spec.sensing.C_cs) / funded
        else:
            bound = mc_sample_bound(
                spec.n,
                spec.J,
                spec.K_eff,
                spec.C_mc,
                spec.bound_mode,
                spec.observation_ratio,
            )
            if bound.exceeds_matrix:
                logger.debug("Observation bound %d exceeds the matrix size", bound.count)
                return math.inf
            required = bound.count / (funded * spec.J1)
    except DomainError as exc:
        logger.debug("Sample bound undefined: %s", exc)
        return math.inf
    return max(required, MIN_WINDOW_SAMPLES / spec.samples_per_beta)


def transmission_share_cap(spec: ProblemSpec) -> float:
    """Largest transmission share 1 - κ·β_min - α2_min any feasible design can reach.

    Args:
        spec: Problem definition.

    Returns:
        The cap; negative or -inf when no design meets the sensing constraint.
    """
    beta_min = beta_lower_bound(spec)
    if beta_min > 1.0:
        return -math.inf
    return 1.0 - spec.kappa * beta_min - spec.alpha2_min


def min_active_count(spec: ProblemSpec) -> int:
    """Smallest J1 for which the cooperative problem has a feasible design.

    At this count the sensing slot absorbs nearly all of the frame left by α2_min, so the
    per-SU throughput is at most transmission_share_cap times the link rate.

    Args:
        spec: Cooperative problem; its J1 is ignored.

    Returns:
        The minimum number of active SUs.

    Raises:
        InfeasibleDesignError: if even J1 = J admits no design.
    """
    for count in range(1, spec.J + 1):
        if transmission_share_cap(dataclasses.replace(spec, J1=count, variant="p1")) >= 0.0:
            return count
    raise InfeasibleDesignError(("C6",))


def _violation_masks(
    spec: ProblemSpec, variant: Variant, design: np.ndarray
) -> dict[str, np.ndarray]:
    """Evaluate each constraint on an (N, 4) array; True marks a violation."""
    alpha1, beta, alpha2, transmit_power = design.T
    transmission = 1.0 - alpha1 - spec.kappa * beta - alpha2
    beta_min = beta_lower_bound(spec, variant)
    return {
        "C1": (alpha1 < 0.0) | (alpha1 > 1.0),
        _sensing_constraint(variant): (beta < beta_min * (1.0 - SLOT_TOLERANCE))
        | (beta > 1.0),
        "C3": (alpha2 < spec.alpha2_min - SLOT_TOLERANCE) | (alpha2 > 1.0),
        "C4": (transmission < -SLOT_TOLERANCE) | (transmission > 1.0),
        "C5": (transmit_power < spec.Pt_min * (1.0 - SLOT_TOLERANCE))
        | (transmit_power > spec.Pt_max * (1.0 + SLOT_TOLERANCE)),
    }


def feasible(d: DesignTuple, spec: ProblemSpec) -> Feasibility:
    """Check C1 to C5 (p0) or C1, C3 to C6 (p1) for a design tuple.

    Args:
        d: Design tuple.
        spec: Problem definition.

    Returns:
        Feasibility: the flag and the violated constraint names.
    """
    masks = _violation_masks(spec, spec.variant, d.as_array()[np.newaxis, :])
    violations = tuple(name for name in CONSTRAINTS if name in masks and masks[name][0])
    return Feasibility(ok=not violations, violations=violations)


def feasible_mask(spec: ProblemSpec, design: np.ndarray) -> np.ndarray:
    """Return the feasibility of each row of an (N, 4) design array."""
    masks = _violation_masks(spec, spec.variant, np.atleast_2d(design))
    return ~np.logical_or.reduce(list(masks.values()))


def violation_amount(spec: ProblemSpec, design: np.ndarray) -> float:
    """Total distance of one design vector from the constraint bounds.

    Args:
        spec: Problem definition.
        design: (alpha1, beta, alpha2, Pt) vector.

    Returns:
        Zero for feasible vectors, a positive amount otherwise.
    """
    alpha1, beta, alpha2, transmit_power = (float(value) for value in design)
    beta_min = min(beta_lower_bound(spec), 1.0)
    transmission = 1.0 - alpha1 - spec.kappa * beta - alpha2
    gaps = (
        -alpha1,
        alpha1 - 1.0,
        beta_min - beta,
        beta - 1.0,
        spec.alpha2_min - alpha2,
        alpha2 - 1.0,
        -transmission,
        (spec.Pt_min - transmit_power) / spec.Pt_max,
        (transmit_power - spec.Pt_max) / spec.Pt_max,
    )
    return float(sum(max(gap, 0.0) for gap in gaps))


def _evaluate(spec: ProblemSpec, variant: Variant, design: np.ndarray) -> np.ndarray:
    """Throughput of feasible rows of an (N, 4) array, without checking feasibility."""
    alpha1, beta, alpha2, transmit_power = design.T
    sensing = spec.kappa * beta
    transmission = np.clip(1.0 - alpha1 - sensing - alpha2, 0.0, None)
    rate = np.log2(1.0 + transmit_power / spec.N0)
    samples = beta * spec.samples_per_beta
    share = transmission * rate

    def outage(kind: Kind) -> np.ndarray:
        mu = mu_values(kind, spec.wpt, alpha1, sensing, alpha2, spec.Ps, transmit_power)
        return np.asarray(outage_closed_form(mu, spec.wpt))

    if variant == "p0":
        false_alarm = np.asarray(pf_analytic(spec.sensing.Pd_target, spec.snr, samples))
        return (1.0 - outage("s")) * (1.0 - outage("t")) * (1.0 - false_alarm) * share
    false_alarm = np.asarray(qf_analytic(spec.sensing.Pd_target, spec.snr, samples, spec.J1))
    available = spec.J1 * (1.0 - outage("a"))
    if spec.J > spec.J1:
        available = available + (spec.J - spec.J1) * (1.0 - outage("i"))
    return available * (1.0 - false_alarm) * share


def objective_batch(spec: ProblemSpec, design: np.ndarray) -> np.ndarray:
    """Objective of spec.variant on an (N, 4) array; infeasible rows score -inf.

    Args:
        spec: Problem definition.
        design: Rows of (alpha1, beta, alpha2, Pt).

    Returns:
        N objective values.
    """
    design = np.atleast_2d(np.asarray(design, dtype=float))
    values = np.full(design.shape[0], -np.inf)
    rows = np.flatnonzero(feasible_mask(spec, design))
    for start in range(0, rows.size, BATCH_SIZE):
        chunk = rows[start : start + BATCH_SIZE]
        values[chunk] = _evaluate(spec, spec.variant, design[chunk])
    return values


def _checked(d: DesignTuple, spec: ProblemSpec, variant: Variant) -> float:
    """Evaluate one tuple after checking it against the constraints of a variant."""
    variant_spec = spec if spec.variant == variant else dataclasses.replace(spec, variant=variant)
    check = feasible(d, variant_spec)
    if not check.ok:
        raise InfeasibleDesignError(check.violations)
    return float(_evaluate(variant_spec, variant, d.as_array()[np.newaxis, :])[0])


def tau_cs(d: DesignTuple, spec: ProblemSpec) -> float:
    """Single-SU throughput with compressive sensing.

    (1 - P_s^out)(1 - P_t^out)(1 - Pf)(1 - α1 - κβ - α2)·log₂(1 + Pt/N0), where Pf uses
    the β·T·Ps/e_s Nyquist-equivalent samples funded by the sensing slot.

    Args:
        d: Design tuple.
        spec: Problem definition; its p0 constraints apply.

    Returns:
        Throughput in bits/s/Hz.

    Raises:
        InfeasibleDesignError: if d violates a constraint.
    """
    return _checked(d, spec, "p0")


def tau_mc(d: DesignTuple, spec: ProblemSpec) -> float:
    """Network throughput of cooperative sensing with matrix completion.

    J1·(1 - P_a^out) + (J - J1)·(1 - P_i^out), times (1 - Qf) and the transmission
    share of the frame. Active SUs have no sensing outage by definition; the same
    transmission fraction applies to inactive SUs, whose longer harvest window is
    carried by P_i^out. Divide by J for the per-SU average.

    Args:
        d: Design tuple.
        spec: Problem definition; its p1 constraints apply.

    Returns:
        Throughput in bits/s/Hz summed over the J SUs.

    Raises:
        InfeasibleDesignError: if d violates a constraint.
    """
    return _checked(d, spec, "p1")


def tau_mc_nyquist(d: DesignTuple, spec: ProblemSpec) -> float:
    """Network throughput without completion: every SU samples at Nyquist rate and reports.

    Args:
        d: Design tuple.
        spec: Problem definition; kappa and J1 are overridden with 1 and J.

    Returns:
        Throughput in bits/s/Hz summed over the J SUs.

    Raises:
        InfeasibleDesignError: if d violates a constraint at kappa = 1.
    """
    return tau_mc(d, dataclasses.replace(spec, kappa=1.0, J1=spec.J))


def objective(spec: ProblemSpec) -> typing.Callable[[DesignTuple], float]:
    """Return the scalar objective of the problem's variant.

    Args:
        spec: Problem definition.

    Returns:
        tau_cs for p0, tau_mc for p1, bound to the spec.
    """
    evaluate = tau_cs if spec.variant == "p0" else tau_mc
    return lambda design: evaluate(design, spec)
