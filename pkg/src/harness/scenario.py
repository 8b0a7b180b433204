# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Scenario catalogue: parameter sweeps producing one result table per figure of the study.

Every sweep point is evaluated independently from the resolved configuration of that
point and its own random stream, Rng(base_seed).child(point_index), so tables do not
depend on n_jobs or on the order in which points complete.
"""

import dataclasses
import itertools
import logging
import math
import typing

import numpy as np
from joblib import Parallel, delayed

import mathkit
import sensing
import wpt
from mathkit import Rng
from optimizer.grid import GridSearch
from optimizer.local import LocalSearch
from optimizer.optimizer import OptResult, Optimizer
from optimizer.random_sampling import RandomSampling
from state.config import ExperimentConfig, SweepValue, UnknownScenarioError
from state.problem import Variant
from state.wpt import FrameSplit, PowerThresholds, WptParams

from .table import ResultTable, build_metadata

logger = logging.getLogger(__name__)

Axis = tuple[str, tuple[SweepValue, ...]]
Row = tuple[typing.Any, ...]
PointFunction = typing.Callable[[ExperimentConfig, Rng, int], list[Row]]

DENSITIES = tuple(float(value) for value in np.logspace(-4.0, -2.0, 10))
ALPHA2_MINS = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3)
KAPPAS = (0.25, 0.5, 0.75, 1.0)
SNRS_DB = (-20.0, -17.5, -15.0, -12.5, -10.0, -7.5, -5.0, -2.5, 0.0)
ACTIVE_COUNTS = (10, 15, 20, 25, 30, 35, 40, 45, 50)
METHODS = ("grid", "random", "local")

AXIS_LABELS = {
    "wpt.lambda_p_per_m2": "lambda_p",
    "power.Ps_dbm": "Ps_dBm",
    "wpt.d0_m": "d0",
}
OPT_COLUMNS = ("tau_opt", "alpha1", "beta", "alpha2", "Pt_dBm", "evaluations", "feasible")


class Scenario(typing.NamedTuple):
    """Catalogue entry.

    Attributes:
        axes: Default sweep axes.
        columns: Result columns appended to the sweep columns.
        evaluate: Point function returning the rows of one sweep point.
        trials: Default Monte Carlo trials per point.
    """

    axes: tuple[Axis, ...]
    columns: tuple[str, ...]
    evaluate: PointFunction
    trials: int = 1


def build_optimizer(
    config: ExperimentConfig, rng: Rng, method: typing.Optional[str] = None
) -> Optimizer:
    """Instantiate an optimizer from the optimizer section.

    Args:
        config: Resolved configuration.
        rng: Stream of the randomized optimizers.
        method: "grid", "random" or "local"; the configured method by default.

    Returns:
        The optimizer.
    """
    settings = config.optimizer
    method = method or settings.method
    if method == "random":
        return RandomSampling(settings.samples, rng)
    if method == "local":
        return LocalSearch(count=settings.starts, budget=settings.budget, rng=rng)
    return GridSearch(settings.steps)


def design_cells(result: OptResult) -> Row:
    """Return the OPT_COLUMNS cells of an optimizer result.

    Args:
        result: Optimizer result.

    Returns:
        The cells; nan design values for an infeasible result.
    """
    if result.best is None:
        return (math.nan,) * 5 + (result.evaluations, False)
    best = result.best
    return (
        result.value,
        best.alpha1,
        best.beta,
        best.alpha2,
        float(mathkit.watt_to_dbm(best.Pt)),
        result.evaluations,
        True,
    )


def _power_components(
    config: ExperimentConfig,
) -> tuple[WptParams, FrameSplit, PowerThresholds]:
    return config.wpt_params(), config.frame_split(), config.power_thresholds()


def sensing_outage_point(config: ExperimentConfig, rng: Rng, trials: int) -> list[Row]:
    """Sensing power outage, closed form against simulation.

    Args:
        config: Configuration of the point.
        rng: Stream of the point.
        trials: Monte Carlo trials.

    Returns:
        One row of (p_out_analytic, p_out_mc, mc_stderr).
    """
    params, frame, thresholds = _power_components(config)
    mu = wpt.mu_coefficient("s", params, frame, thresholds)
    analytic = float(wpt.outage_closed_form(mu, params))
    estimate = wpt.outage_monte_carlo("s", params, frame, thresholds, trials, rng.generator())
    return [(analytic, estimate.estimate, estimate.stderr)]


def detection_point(config: ExperimentConfig, rng: Rng, trials: int) -> list[Row]:
    """False-alarm and detection rates of the compressive energy detector.

    pf_analytic is the reference curve at sensing.n_samples. The simulated detector
    recovers each window with the least-norm estimate and holds its noise-only false-alarm
    rate at that reference, using the noise floor it expects after recovery at the nominal
    snr. At κ = 1 the recovered bins are the received spectrum and the empirical rate
    matches the reference. Compression spreads each noise-only channel's energy unevenly
    over its bins, which fattens the tail of the statistic and raises the rate.
    pf_threshold is the rate the Gaussian approximation assigns to the same threshold.

    Args:
        config: Configuration of the point.
        rng: Stream of the point.
        trials: Sensing windows simulated.

    Returns:
        One row of (pf_analytic, pf_threshold, pf_empirical, pd_empirical).
    """
    settings = config.sensing
    generator = rng.generator()
    n, channels, occupied = settings.detection_n_samples, settings.channels, settings.occupied
    bins = n // channels
    op = sensing.measurement_op(n, config.frame.kappa, generator)
    reference = float(sensing.pf_analytic(settings.Pd_target, config.snr, settings.n_samples))
    floor = sensing.recovered_noise_floor(
        op.kappa, settings.noise_w, config.snr * settings.noise_w
    )
    threshold = sensing.channel_threshold(reference, bins, floor)
    false_alarms = detections = 0
    for _ in range(trials):
        scene = sensing.draw_scene(channels, occupied, n, config.snr, settings.noise_w, generator)
        decisions = sensing.sense_scene(
            scene, op, threshold, generator, method="least_norm"
        ).decisions
        truth = np.zeros(channels, dtype=bool)
        truth[list(scene.occupied)] = True
        false_alarms += int(np.count_nonzero(decisions & ~truth))
        detections += int(np.count_nonzero(decisions & truth))
    implied = sensing.pf_from_threshold(threshold, 2 * bins, floor)
    return [
        (
            reference,
            implied,
            false_alarms / (trials * (channels - occupied)),
            detections / (trials * occupied),
        )
    ]


def optimizer_comparison_point(config: ExperimentConfig, rng: Rng, trials: int) -> list[Row]:
    """Run every optimizer on the configured problem.

    Args:
        config: Configuration of the point.
        rng: Stream of the point.
        trials: Unused.

    Returns:
        One row per method.
    """
    del trials
    spec = config.problem_spec()
    return [
        (method,) + design_cells(build_optimizer(config, rng.child(index), method).optimize(spec))
        for index, method in enumerate(METHODS)
    ]


def _optimum(config: ExperimentConfig, rng: Rng, variant: Variant) -> OptResult:
    return build_optimizer(config, rng).optimize(config.problem_spec(variant))


def single_optimum_point(config: ExperimentConfig, rng: Rng, trials: int) -> list[Row]:
    """Optimum of the single-SU problem.

    Args:
        config: Configuration of the point.
        rng: Stream of the point.
        trials: Unused.

    Returns:
        One row of OPT_COLUMNS.
    """
    del trials
    return [design_cells(_optimum(config, rng, "p0"))]


def network_optimum_point(config: ExperimentConfig, rng: Rng, trials: int) -> list[Row]:
    """Optimum of the cooperative problem, with the per-SU average first.

    Args:
        config: Configuration of the point.
        rng: Stream of the point.
        trials: Unused.

    Returns:
        One row of (tau_per_su,) + OPT_COLUMNS.
    """
    del trials
    result = _optimum(config, rng, "p1")
    return [(result.value / config.network.J,) + design_cells(result)]


def system_outage_point(config: ExperimentConfig, rng: Rng, trials: int) -> list[Row]:
    """System outage of a single SU against the active, inactive and average SU of a network.

    The simulated network draws J·(trials // J) independent SU fields, each SU deciding
    its activity from its own first-slot harvest.

    Args:
        config: Configuration of the point.
        rng: Stream of the point.
        trials: Simulated SU fields.

    Returns:
        One row of (p_out_single, p_out_active, p_out_inactive, p_out_average,
        active_fraction_mc, p_out_average_mc).
    """
    params, frame, thresholds = _power_components(config)
    network = config.network
    sensing_outage = float(
        wpt.outage_closed_form(wpt.mu_coefficient("s", params, frame, thresholds), params)
    )
    transmit_outage = float(
        wpt.outage_closed_form(wpt.mu_coefficient("t", params, frame, thresholds), params)
    )
    profile = wpt.css_outage_profile(params, frame, thresholds, network.J, network.J1)
    simulated = wpt.css_outage_monte_carlo(
        params, frame, thresholds, network.J, max(1, trials // network.J), rng.generator()
    )
    return [
        (
            wpt.system_outage(sensing_outage, transmit_outage),
            profile.p_active,
            profile.p_inactive,
            profile.p_average,
            simulated.active_fraction,
            simulated.p_average,
        )
    ]


def benchmark_point(config: ExperimentConfig, rng: Rng, trials: int) -> list[Row]:
    """Conventional Nyquist frame without a third slot bound against the compressive frame.

    Args:
        config: Configuration of the point.
        rng: Stream of the point.
        trials: Unused.

    Returns:
        Two rows of (frame,) + OPT_COLUMNS.
    """
    del trials
    compressive = config.problem_spec("p0")
    conventional = dataclasses.replace(compressive, kappa=1.0, alpha2_min=0.0)
    optimizer = build_optimizer(config, rng)
    return [
        ("conventional",) + design_cells(optimizer.optimize(conventional)),
        ("compressive",) + design_cells(optimizer.optimize(compressive)),
    ]


SCENARIO_CATALOGUE: dict[str, Scenario] = {
    "fig2": Scenario(
        axes=(
            ("wpt.lambda_p_per_m2", DENSITIES),
            ("power.Ps_dbm", (0.0, 10.0)),
            ("wpt.d0_m", (1.0, 1.5)),
        ),
        columns=("p_out_analytic", "p_out_mc", "mc_stderr"),
        evaluate=sensing_outage_point,
        trials=100_000,
    ),
    "fig3": Scenario(
        axes=(("sensing.snr_db", SNRS_DB), ("frame.kappa", (1.0, 0.5, 0.25))),
        columns=("pf_analytic", "pf_threshold", "pf_empirical", "pd_empirical"),
        evaluate=detection_point,
        trials=10_000,
    ),
    "fig4": Scenario(
        axes=(("optimizer.alpha2_min", ALPHA2_MINS),),
        columns=("method",) + OPT_COLUMNS,
        evaluate=optimizer_comparison_point,
    ),
    "fig5": Scenario(
        axes=(("optimizer.alpha2_min", ALPHA2_MINS), ("frame.kappa", KAPPAS)),
        columns=OPT_COLUMNS,
        evaluate=single_optimum_point,
    ),
    "fig6": Scenario(
        axes=(("wpt.lambda_p_per_m2", DENSITIES), ("power.Ps_dbm", (0.0, 10.0))),
        columns=(
            "p_out_single",
            "p_out_active",
            "p_out_inactive",
            "p_out_average",
            "active_fraction_mc",
            "p_out_average_mc",
        ),
        evaluate=system_outage_point,
        trials=100_000,
    ),
    "fig7": Scenario(
        axes=(("network.J1", ACTIVE_COUNTS), ("frame.kappa", KAPPAS)),
        columns=("tau_per_su",) + OPT_COLUMNS,
        evaluate=network_optimum_point,
    ),
    "fig8": Scenario(
        axes=(("optimizer.alpha2_min", ALPHA2_MINS), ("frame.kappa", KAPPAS)),
        columns=("tau_per_su",) + OPT_COLUMNS,
        evaluate=network_optimum_point,
    ),
    "benchmark": Scenario(
        axes=(("frame.kappa", (0.25, 0.5, 0.75)),),
        columns=("frame",) + OPT_COLUMNS,
        evaluate=benchmark_point,
    ),
}


def column_label(name: str) -> str:
    """Return the table header of a sweep axis."""
    return AXIS_LABELS.get(name, name.partition(".")[2])


def sweep_points(
    config: ExperimentConfig, axes: typing.Sequence[Axis]
) -> list[tuple[tuple[SweepValue, ...], ExperimentConfig]]:
    """Expand the axes into resolved point configurations, first axis outermost.

    Args:
        config: Base configuration.
        axes: Sweep axes.

    Returns:
        (axis values, point configuration) pairs in sweep order.
    """
    points = []
    for values in itertools.product(*(axis_values for _, axis_values in axes)):
        point_config = config
        for (name, _), value in zip(axes, values):
            point_config = point_config.override(name, value)
        points.append((values, point_config))
    return points


def run_scenario(config: ExperimentConfig) -> ResultTable:
    """Evaluate every sweep point of the configured scenario.

    Args:
        config: Resolved configuration.

    Returns:
        ResultTable: one block of rows per sweep point, in sweep order.

    Raises:
        UnknownScenarioError: if the scenario id is not in the catalogue.
    """
    scenario_id = config.experiment.scenario
    if scenario_id not in SCENARIO_CATALOGUE:
        raise UnknownScenarioError(f"unknown scenario {scenario_id!r}")
    scenario = SCENARIO_CATALOGUE[scenario_id]
    axes = tuple((axis.name, axis.values) for axis in config.sweep) or scenario.axes
    trials = config.experiment.trials or scenario.trials
    points = sweep_points(config, axes)
    logger.info(
        "Running %s: %d points, %d trials, n_jobs=%d",
        scenario_id,
        len(points),
        trials,
        config.experiment.n_jobs,
    )
    base = Rng(base_seed=config.experiment.base_seed)
    blocks = Parallel(n_jobs=config.experiment.n_jobs)(
        delayed(scenario.evaluate)(point_config, base.child(index), trials)
        for index, (_, point_config) in enumerate(points)
    )
    rows = tuple(
        tuple(values) + tuple(row) for (values, _), block in zip(points, blocks) for row in block
    )
    columns = tuple(column_label(name) for name, _ in axes) + scenario.columns
    metadata = build_metadata(config)
    metadata["trials"] = str(trials)
    return ResultTable(columns=columns, rows=rows, metadata=metadata)


def compare_optimizers(config: ExperimentConfig) -> ResultTable:
    """Run the optimizer comparison sweep on the configured problem.

    Args:
        config: Resolved configuration; its scenario id is replaced by fig4.

    Returns:
        ResultTable: rows of (alpha2_min, method) + OPT_COLUMNS.
    """
    return run_scenario(config.override("experiment.scenario", "fig4"))
