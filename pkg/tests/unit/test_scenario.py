# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Unit tests for the scenario catalogue."""

import dataclasses

import pytest

from harness.scenario import (
    METHODS,
    SCENARIO_CATALOGUE,
    compare_optimizers,
    run_scenario,
    sweep_points,
)
from harness.table import render_table
from state.config import ExperimentConfig, UnknownScenarioError, resolve_config

COARSE_OPTIMIZER = {
    "steps": [0.05, 0.05, 0.05, 5.0],
    "samples": 500,
    "starts": 2,
    "budget": 60,
}


def _config(scenario: str, sweep: list, trials: int = 1, **sections) -> ExperimentConfig:
    """Resolve a configuration of one scenario with explicit sweep axes."""
    experiment = {"scenario": scenario, "trials": trials, "base_seed": 3}
    experiment.update(sections.pop("experiment", {}))
    return resolve_config({"experiment": experiment, "sweep": sweep, **sections})


def test_catalogue():
    """
    arrange: Given the scenario catalogue.
    act: Inspect its entries.
    assert: Every figure of the study and the benchmark is present.
    """
    assert set(SCENARIO_CATALOGUE) == {
        "fig2",
        "fig3",
        "fig4",
        "fig5",
        "fig6",
        "fig7",
        "fig8",
        "benchmark",
    }


def test_fig2_default_axes(experiment_config: ExperimentConfig):
    """
    arrange: Given the default fig2 axes.
    act: Expand the sweep.
    assert: 10 densities, 2 sensing powers and 2 protection radii give 40 points.
    """
    points = sweep_points(experiment_config, SCENARIO_CATALOGUE["fig2"].axes)

    assert len(points) == 40
    assert points[1][0][0] == pytest.approx(1e-4)
    assert points[1][0][1:] == (0.0, 1.5)
    assert points[1][1].wpt.d0_m == 1.5


def test_fig2_outage():
    """
    arrange: Given one density with 4000 trials.
    act: Run fig2.
    assert: Simulation agrees with the closed form within max(3·SE, 0.01).
    """
    config = _config("fig2", [{"name": "wpt.lambda_p_per_m2", "values": [1e-3]}], 4000)

    table = run_scenario(config)

    assert table.columns == ("lambda_p", "p_out_analytic", "p_out_mc", "mc_stderr")
    _, analytic, simulated, stderr = table.rows[0]
    assert abs(analytic - simulated) <= max(3.0 * stderr, 0.01)
    assert table.metadata["trials"] == "4000"


def test_fig2_without_beacons():
    """
    arrange: Given a field without beacons and a single trial.
    act: Run fig2.
    assert: Both outages are exactly one.
    """
    config = _config("fig2", [{"name": "wpt.lambda_p_per_m2", "values": [0.0]}])

    table = run_scenario(config)

    assert table.column("p_out_mc") == [1.0]
    assert table.column("p_out_analytic") == [1.0]


def test_fig2_standard_error_scaling():
    """
    arrange: Given 4000 and 16000 trials.
    act: Run fig2 at both.
    assert: Four times the trials halve the standard error within 20%.
    """
    sweep = [{"name": "wpt.lambda_p_per_m2", "values": [1e-3]}]

    small = run_scenario(_config("fig2", sweep, 4000)).column("mc_stderr")[0]
    large = run_scenario(_config("fig2", sweep, 16000)).column("mc_stderr")[0]

    assert small / large == pytest.approx(2.0, rel=0.2)


def test_run_scenario_deterministic():
    """
    arrange: Given a two-point fig2 sweep.
    act: Run it sequentially twice and with two workers.
    assert: The rendered tables are identical.
    """
    sweep = [{"name": "wpt.lambda_p_per_m2", "values": [5e-4, 2e-3]}]
    sequential = _config("fig2", sweep, 500)
    parallel = sequential.override("experiment.n_jobs", 2)

    first = render_table(run_scenario(sequential))

    assert render_table(run_scenario(sequential)) == first
    assert render_table(run_scenario(parallel)) == first


def test_fig3_detection():
    """
    arrange: Given −10 dB with κ = 1 and κ = 0.5 and 2000 windows each.
    act: Run fig3.
    assert: The uncompressed false-alarm rate matches the reference within 0.02, halving
        the samples moves it by at most 0.03, and every rate is a probability.
    """
    config = _config(
        "fig3",
        [
            {"name": "sensing.snr_db", "values": [-10.0]},
            {"name": "frame.kappa", "values": [1.0, 0.5]},
        ],
        2000,
    )

    table = run_scenario(config)

    assert table.columns[:2] == ("snr_db", "kappa")
    assert len(table.rows) == 2
    for row in table.rows:
        assert all(0.0 <= rate <= 1.0 for rate in row[2:])
    reference = table.column("pf_analytic")[0]
    uncompressed, halved = table.column("pf_empirical")
    assert reference == pytest.approx(0.186, abs=1e-3)
    assert abs(uncompressed - reference) <= 0.02
    assert abs(halved - uncompressed) <= 0.03
    assert all(pd > pf for pd, pf in zip(table.column("pd_empirical"), (uncompressed, halved)))


def test_compare_optimizers():
    """
    arrange: Given one α2_min and small optimizer budgets.
    act: Compare the optimizers.
    assert: One feasible row per method and the grid optimum sits on α2_min.
    """
    config = _config(
        "fig2",
        [{"name": "optimizer.alpha2_min", "values": [0.1]}],
        optimizer=COARSE_OPTIMIZER,
    )

    table = compare_optimizers(config)

    assert table.metadata["scenario"] == "fig4"
    assert table.column("method") == list(METHODS)
    assert all(table.column("feasible"))
    grid = table.rows[0]
    assert grid[5] == pytest.approx(0.1)
    assert all(value > 0.0 for value in table.column("tau_opt"))


def test_fig6_system_outage():
    """
    arrange: Given one density and 2000 simulated SU fields.
    act: Run fig6.
    assert: Inactive SUs see less outage than active ones and the average lies between.
    """
    config = _config(
        "fig6",
        [{"name": "wpt.lambda_p_per_m2", "values": [1e-3]}],
        2000,
    )

    (row,) = run_scenario(config).rows

    _, single, active, inactive, average, fraction, simulated = row
    assert inactive <= average <= active
    assert 0.0 <= fraction <= 1.0 and 0.0 <= simulated <= 1.0
    assert 0.0 <= single <= 1.0


def test_fig7_per_su_average():
    """
    arrange: Given one network point and a coarse grid.
    act: Run fig7.
    assert: The per-SU value is the network optimum over J.
    """
    config = _config(
        "fig7",
        [{"name": "network.J1", "values": [30]}, {"name": "frame.kappa", "values": [1.0]}],
        optimizer=COARSE_OPTIMIZER,
    )

    table = run_scenario(config)

    (row,) = table.rows
    assert table.columns[:3] == ("J1", "kappa", "tau_per_su")
    assert row[2] == pytest.approx(row[3] / 50)


def test_benchmark():
    """
    arrange: Given one compression ratio and a coarse grid.
    act: Run the benchmark.
    assert: The conventional and the compressive frame are reported, both feasible.
    """
    config = _config(
        "benchmark", [{"name": "frame.kappa", "values": [0.5]}], optimizer=COARSE_OPTIMIZER
    )

    table = run_scenario(config)

    assert table.column("frame") == ["conventional", "compressive"]
    assert all(table.column("feasible"))


def test_unknown_scenario(experiment_config: ExperimentConfig):
    """
    arrange: Given a configuration whose scenario bypassed resolution.
    act: Run it.
    assert: UnknownScenarioError is raised.
    """
    experiment = dataclasses.replace(experiment_config.experiment, scenario="fig9")
    config = dataclasses.replace(experiment_config, experiment=experiment)

    with pytest.raises(UnknownScenarioError):
        run_scenario(config)
