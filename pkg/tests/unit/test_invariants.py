# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Unit tests for the invariant suite."""

from unittest.mock import MagicMock

import pytest

from harness import invariants
from harness.invariants import Check
from mathkit import Rng
from state.config import ExperimentConfig


@pytest.mark.parametrize(
    "check",
    [
        pytest.param(invariants.incomplete_gamma_recurrence, id="gamma recurrence"),
        pytest.param(invariants.q_roundtrip, id="q roundtrip"),
        pytest.param(invariants.outage_spot_check, id="outage spot check"),
        pytest.param(invariants.false_alarm_reference, id="false alarm reference"),
        pytest.param(invariants.network_outage_gain, id="network outage gain"),
    ],
)
def test_closed_form_checks(check, experiment_config: ExperimentConfig):
    """
    arrange: Given the default configuration.
    act: Run a closed-form check.
    assert: It passes.
    """
    result = check(experiment_config, Rng(base_seed=1))

    assert result.passed, result


def test_outage_spot_simulation(experiment_config: ExperimentConfig):
    """
    arrange: Given 20000 trials.
    act: Simulate the spot-check field.
    assert: It agrees with the closed form within three standard errors.
    """
    config = experiment_config.override("experiment.trials", 20000)

    result = invariants.outage_spot_simulation(config, Rng(base_seed=1))

    assert result.passed, result


def test_run_invariants(monkeypatch: pytest.MonkeyPatch, experiment_config: ExperimentConfig):
    """
    arrange: Given a suite of one passing and one failing check.
    act: Run the suite.
    assert: One row per check, the failure is flagged and each check has its own stream.
    """
    passing = MagicMock(return_value=Check(0.0, 1.0, True))
    failing = MagicMock(return_value=Check(2.0, 1.0, False))
    monkeypatch.setattr(invariants, "INVARIANT_CHECKS", {"ok": passing, "bad": failing})

    table = invariants.run_invariants(experiment_config)

    assert table.columns == ("check", "passed", "value", "tolerance")
    assert table.rows == (("ok", True, 0.0, 1.0), ("bad", False, 2.0, 1.0))
    assert table.flagged() == 1
    assert table.metadata["scenario"] == "validate"
    assert passing.call_args.args[1] != failing.call_args.args[1]
