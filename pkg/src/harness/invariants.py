# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Invariant suite run by the validate command.

Each check measures one deviation and compares it with its tolerance; the suite is a
table with one row per check, and any failed row makes the command exit nonzero.
"""

import dataclasses
import logging
import math
import typing

import numpy as np
from scipy import stats

import mathkit
import sensing
import wpt
from completion import FcMatrix, assemble_fc_matrix, complete_matrix
from mathkit import Rng
from optimizer.grid import GridSearch
from optimizer.local import LocalSearch
from sensing import MeasurementOp
from state.completion import CompletionConfig
from state.config import ExperimentConfig
from state.wpt import WptParams

from .table import ResultTable, build_metadata

logger = logging.getLogger(__name__)

COLUMNS = ("check", "passed", "value", "tolerance")
KS_DRAWS = 100_000
KS_ANTENNAS = (1, 8, 32)
SPOT_TRIALS = 100_000
SPOT_MU = 0.01
SPOT_OUTAGE = 0.7327
PF_REFERENCE = 0.186
COARSE_STEPS = (0.05, 0.05, 0.05, 5.0)
RANK_ONE_CHANNELS = 16
RANK_ONE_OCCUPIED = 2


class Check(typing.NamedTuple):
    """Result of one invariant check.

    Attributes:
        value: Measured deviation.
        tolerance: Bound the deviation is compared with.
        passed: Whether the invariant holds.
    """

    value: float
    tolerance: float
    passed: bool


def _within(value: float, tolerance: float) -> Check:
    return Check(float(value), tolerance, bool(value <= tolerance))


def rank_one_instance(
    n: int, J: int, J1: int, kappa: float, rng: np.random.Generator
) -> tuple[FcMatrix, list[MeasurementOp]]:
    """Build a noiseless instance where every SU sees the same spectrum.

    Args:
        n: Nyquist samples per window.
        J: Number of SUs.
        J1: Number of reporting SUs.
        kappa: Compression ratio of every SU.
        rng: Random stream.

    Returns:
        The fusion-center matrix (ground truth attached) and the operator of every SU.
    """
    scene = sensing.draw_scene(RANK_ONE_CHANNELS, RANK_ONE_OCCUPIED, n, 1.0, 1.0, rng)
    _, spectrum = sensing.synthesize_received(scene, rng)
    truth = np.tile(spectrum[:, np.newaxis], (1, J))
    ops = [sensing.measurement_op(n, kappa, rng) for _ in range(J)]
    observed = sorted(int(index) for index in rng.choice(J, size=J1, replace=False))
    views = [(index, ops[index].Theta @ truth[:, index]) for index in observed]
    return dataclasses.replace(assemble_fc_matrix(views, J), ground_truth=truth), ops


def _relative_error(estimate: np.ndarray, truth: np.ndarray) -> float:
    return float(np.linalg.norm(estimate - truth) / np.linalg.norm(truth))


def incomplete_gamma_recurrence(config: ExperimentConfig, rng: Rng) -> Check:
    """Γ(a+1, z) = a·Γ(a, z) + z^a·e^(-z) at (0.5, 2.3)."""
    del config, rng
    a, z = 0.5, 2.3
    gap = (
        mathkit.upper_incomplete_gamma(a + 1.0, z)
        - a * mathkit.upper_incomplete_gamma(a, z)
        - z**a * math.exp(-z)
    )
    return _within(abs(gap), 1e-8)


def q_roundtrip(config: ExperimentConfig, rng: Rng) -> Check:
    """Q(Q⁻¹(p)) = p."""
    del config, rng
    probability = 0.137
    return _within(abs(mathkit.q_function(mathkit.q_inverse(probability)) - probability), 1e-9)


def erlang_ks(config: ExperimentConfig, rng: Rng) -> Check:
    """Largest Kolmogorov-Smirnov distance of the channel gain draws over KS_ANTENNAS."""
    del config
    generator = rng.generator()
    distance = max(
        stats.kstest(
            mathkit.sample_channel_gain(antennas, generator, size=KS_DRAWS),
            lambda x, antennas=antennas: mathkit.erlang_cdf(x, antennas),
        ).statistic
        for antennas in KS_ANTENNAS
    )
    return _within(distance, 0.01)


def _spot_params() -> WptParams:
    return WptParams(lambda_p=1e-3, M=1, Pp=1.0, eta=1.0, xi=2.0, d0=1.0)


def outage_spot_check(config: ExperimentConfig, rng: Rng) -> Check:
    """Closed-form outage of a single-antenna field at μ = 0.01."""
    del config, rng
    analytic = float(wpt.outage_closed_form(SPOT_MU, _spot_params()))
    return _within(abs(analytic - SPOT_OUTAGE), 5e-4)


def outage_spot_simulation(config: ExperimentConfig, rng: Rng) -> Check:
    """Simulated outage of the spot-check field within three standard errors."""
    params = _spot_params()
    trials = config.experiment.trials or SPOT_TRIALS
    analytic = float(wpt.outage_closed_form(SPOT_MU, params))
    gains = wpt.max_effective_gains(
        params, wpt.default_r_max(SPOT_MU, params), trials, rng.generator()
    )
    estimate = float(np.count_nonzero(gains <= SPOT_MU)) / trials
    return _within(abs(estimate - analytic), 3.0 * math.sqrt(analytic * (1 - analytic) / trials))


def false_alarm_reference(config: ExperimentConfig, rng: Rng) -> Check:
    """Single-SU false alarm at P̄_d = 0.9, snr = 0.1, n = 1000."""
    del config, rng
    return _within(abs(sensing.pf_analytic(0.9, 0.1, 1000) - PF_REFERENCE), 1e-3)


def completion_rank_one(config: ExperimentConfig, rng: Rng) -> Check:
    """Relative error of a noiseless rank-one completion with half the columns observed."""
    del config
    fc, ops = rank_one_instance(128, 16, 8, 0.5, rng.generator())
    result = complete_matrix(fc, ops, CompletionConfig())
    truth = typing.cast(np.ndarray, fc.ground_truth)
    return _within(_relative_error(result.estimate, truth), 1e-3)


def completion_full_inverse(config: ExperimentConfig, rng: Rng) -> Check:
    """Relative error of a fully observed, uncompressed instance."""
    del config
    fc, ops = rank_one_instance(128, 16, 16, 1.0, rng.generator())
    result = complete_matrix(fc, ops, CompletionConfig())
    truth = typing.cast(np.ndarray, fc.ground_truth)
    return _within(_relative_error(result.estimate, truth), 1e-6)


def grid_third_slot(config: ExperimentConfig, rng: Rng) -> Check:
    """Distance of the grid optimum's second harvest slot from its lower bound."""
    del rng
    spec = config.problem_spec("p0")
    result = GridSearch(COARSE_STEPS).optimize(spec)
    if result.best is None:
        return Check(math.nan, 1e-12, False)
    return _within(abs(result.best.alpha2 - spec.alpha2_min), 1e-12)


def local_no_regression(config: ExperimentConfig, rng: Rng) -> Check:
    """Shortfall of local search started at the grid optimum against that optimum."""
    del rng
    spec = config.problem_spec("p0")
    grid = GridSearch(COARSE_STEPS).optimize(spec)
    if grid.best is None:
        return Check(math.nan, 0.0, False)
    local = LocalSearch(starts=[grid.best], budget=config.optimizer.budget).optimize(spec)
    return _within(grid.value - local.value, 1e-12 * abs(grid.value))


def network_outage_gain(config: ExperimentConfig, rng: Rng) -> Check:
    """Average network outage minus single-SU system outage; negative when it holds."""
    del rng
    params, frame, thresholds = (
        config.wpt_params(),
        config.frame_split(),
        config.power_thresholds(),
    )
    single = wpt.system_outage(
        float(wpt.outage_closed_form(wpt.mu_coefficient("s", params, frame, thresholds), params)),
        float(wpt.outage_closed_form(wpt.mu_coefficient("t", params, frame, thresholds), params)),
    )
    profile = wpt.css_outage_profile(
        params, frame, thresholds, config.network.J, config.network.J1
    )
    margin = profile.p_average - single
    return Check(margin, 0.0, bool(margin < 0.0))


INVARIANT_CHECKS: dict[str, typing.Callable[[ExperimentConfig, Rng], Check]] = {
    "incomplete_gamma_recurrence": incomplete_gamma_recurrence,
    "q_roundtrip": q_roundtrip,
    "erlang_ks": erlang_ks,
    "outage_spot_check": outage_spot_check,
    "outage_spot_simulation": outage_spot_simulation,
    "false_alarm_reference": false_alarm_reference,
    "completion_rank_one": completion_rank_one,
    "completion_full_inverse": completion_full_inverse,
    "grid_third_slot": grid_third_slot,
    "local_no_regression": local_no_regression,
    "network_outage_gain": network_outage_gain,
}


def run_invariants(config: ExperimentConfig) -> ResultTable:
    """Run every check, each on its own stream Rng(base_seed).child(index).

    Args:
        config: Resolved configuration.

    Returns:
        ResultTable: rows of (check, passed, value, tolerance).
    """
    base = Rng(base_seed=config.experiment.base_seed)
    rows = []
    for index, (name, check) in enumerate(INVARIANT_CHECKS.items()):
        result = check(config, base.child(index))
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, "%s: value=%g tolerance=%g", name, result.value, result.tolerance)
        rows.append((name, result.passed, result.value, result.tolerance))
    metadata = build_metadata(config)
    metadata["scenario"] = "validate"
    return ResultTable(columns=COLUMNS, rows=tuple(rows), metadata=metadata)
