# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""General configuration module for acceptance tests."""

import logging
from pathlib import Path

import pytest

logger = logging.getLogger(__name__)

OUTAGE_TRIALS = 100_000


@pytest.fixture(scope="module", name="trials_scale")
def trials_scale_fixture(pytestconfig: pytest.Config) -> float:
    """Get value from parameter trials-scale."""
    scale = pytestconfig.getoption("--trials-scale")
    assert 0.0 < scale <= 1.0, "--trials-scale must lie in (0, 1]"
    return scale


@pytest.fixture(scope="module", name="outage_trials")
def outage_trials_fixture(trials_scale: float) -> int:
    """Monte Carlo trials per outage point."""
    trials = max(1000, int(OUTAGE_TRIALS * trials_scale))
    logger.info("Using %d outage trials per point", trials)
    return trials


@pytest.fixture(scope="module", name="output_dir")
def output_dir_fixture(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Directory collecting the tables written by the acceptance runs."""
    return tmp_path_factory.mktemp("tables")
