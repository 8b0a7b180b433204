# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Fixtures for wpcr-frame-design unit tests."""

import numpy as np
import pytest

import mathkit
from mathkit import Rng
from state.config import ExperimentConfig, resolve_config
from state.problem import ProblemSpec
from state.wpt import FrameSplit, PowerThresholds, WptParams

TEST_SEED = 20240611


@pytest.fixture(scope="function", name="rng")
def rng_fixture() -> np.random.Generator:
    """Seeded generator of the test stream."""
    return Rng(base_seed=TEST_SEED).generator()


@pytest.fixture(scope="function", name="wpt_params")
def wpt_params_fixture() -> WptParams:
    """Beacon field at the default operating point."""
    return WptParams(lambda_p=1e-3, M=32, Pp=float(mathkit.dbm_to_watt(43.0)), eta=0.8)


@pytest.fixture(scope="function", name="frame")
def frame_fixture() -> FrameSplit:
    """Default frame split without compression."""
    return FrameSplit(alpha1=0.25, beta=0.25, alpha2=0.2)


@pytest.fixture(scope="function", name="thresholds")
def thresholds_fixture() -> PowerThresholds:
    """Power thresholds at Ps = 0 dBm and Pt = 10 dBm."""
    return PowerThresholds(Ps=1e-3, Pt=1e-2, Pt_min=1e-3, Pt_max=0.1, N0=1e-12)


@pytest.fixture(scope="function", name="experiment_config")
def experiment_config_fixture() -> ExperimentConfig:
    """Configuration with every default applied."""
    return resolve_config({})


@pytest.fixture(scope="function", name="p0_spec")
def p0_spec_fixture(experiment_config: ExperimentConfig) -> ProblemSpec:
    """Single-SU problem at the default configuration."""
    return experiment_config.problem_spec("p0")


@pytest.fixture(scope="function", name="p1_spec")
def p1_spec_fixture(experiment_config: ExperimentConfig) -> ProblemSpec:
    """Cooperative problem at the default configuration."""
    return experiment_config.problem_spec("p1")
