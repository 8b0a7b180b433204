# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Acceptance runs of the command line against the figure scenarios."""

import logging
from pathlib import Path

import pytest

import cli
import mathkit
from harness.table import ResultTable, read_table
from optimizer.local import LocalSearch
from state.config import load_config
from state.problem import DesignTuple
from state.validation import EXIT_OK

logger = logging.getLogger(__name__)

OPTIMIZER_CONFIG = """\
optimizer:
  steps: [0.05, 0.05, 0.05, 1.0]
  samples: 10000
  starts: 20
"""


def _run(argv: list[str], out: Path) -> ResultTable:
    """Run the command line, check its exit code and read the table back."""
    code = cli.main(argv + ["--out", str(out)])
    assert code == EXIT_OK, f"{argv} exited with {code}"
    return read_table(out)


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def test_validate(output_dir: Path):
    """
    arrange: Given the default configuration.
    act: Run the invariant suite.
    assert: Every check passes.
    """
    table = _run(["validate"], output_dir / "validate.csv")

    failed = [row[0] for row in table.rows if row[1] is not True]
    assert not failed, f"failed checks: {failed}"


def test_fig2_outage_agreement(output_dir: Path, outage_trials: int):
    """
    arrange: Given the full fig2 grid of 40 points.
    act: Run fig2.
    assert: Closed form and simulation agree within max(3·SE, 0.01) at every point.
    """
    table = _run(["run", "fig2", "--trials", str(outage_trials)], output_dir / "fig2.csv")

    assert len(table.rows) == 40
    for row in table.rows:
        *_, analytic, simulated, stderr = row
        assert abs(analytic - simulated) <= max(3.0 * stderr, 0.01), row


def test_fig2_byte_identical(output_dir: Path, tmp_path: Path):
    """
    arrange: Given a two-density fig2 sweep run with one and with four workers.
    act: Run it three times.
    assert: Every run writes byte-identical tables whatever the worker count.
    """
    sweep = "sweep:\n  - name: wpt.lambda_p_per_m2\n    values: [0.0005, 0.005]\n"
    sequential = _write(tmp_path / "one.yaml", sweep)
    parallel = _write(tmp_path / "four.yaml", sweep + "experiment:\n  n_jobs: 4\n")
    argv = ["run", "fig2", "--trials", "2000", "--seed", "5"]

    first = _run(argv + ["--config", str(sequential)], output_dir / "seq1.csv")
    second = _run(argv + ["--config", str(sequential)], output_dir / "seq2.csv")
    threaded = _run(argv + ["--config", str(parallel)], output_dir / "par.csv")

    assert (output_dir / "seq1.csv").read_bytes() == (output_dir / "seq2.csv").read_bytes()
    assert (output_dir / "par.csv").read_bytes() == (output_dir / "seq1.csv").read_bytes()
    assert first == second == threaded


def test_fig3_reference(output_dir: Path):
    """
    arrange: Given fig3 at −10 dB for every compression ratio with 10⁴ windows each.
    act: Run fig3.
    assert: The uncompressed detector matches the 0.186 reference within 0.02, κ = 0.5
        stays within 0.03 of it and κ = 0.25 raises the false-alarm rate.
    """
    config = "sweep:\n  - name: sensing.snr_db\n    values: [-10.0]\n"
    config += "  - name: frame.kappa\n    values: [1.0, 0.5, 0.25]\n"
    path = _write(output_dir / "fig3.yaml", config)

    table = _run(
        ["run", "fig3", "--config", str(path), "--trials", "10000"], output_dir / "fig3.csv"
    )

    assert table.column("kappa") == [1.0, 0.5, 0.25]
    assert table.column("pf_analytic") == pytest.approx([0.186] * 3, abs=1e-3)
    for row in table.rows:
        assert all(0.0 <= rate <= 1.0 for rate in row[2:])
    full, half, quarter = table.column("pf_empirical")
    assert abs(full - table.column("pf_analytic")[0]) <= 0.02
    assert abs(half - full) <= 0.03
    assert quarter > full


def test_fig4_optimizer_structure(output_dir: Path):
    """
    arrange: Given the fig4 sweep over α2_min with Z = 10⁴ random tuples.
    act: Compare the optimizers and restart local search at each grid optimum.
    assert: Grid optima sit on α2_min, random sampling stays within 2% of the grid and
        local search from the grid optimum never regresses.
    """
    path = _write(output_dir / "fig4.yaml", OPTIMIZER_CONFIG)
    table = _run(["run", "fig4", "--config", str(path)], output_dir / "fig4.csv")
    config = load_config(path)

    assert len(table.rows) == 18
    grid_rows = [row for row in table.rows if row[1] == "grid"]
    random_rows = [row for row in table.rows if row[1] == "random"]
    for grid, random_sampling in zip(grid_rows, random_rows):
        alpha2_min, _, value, alpha1, beta, alpha2, pt_dbm, _, feasible = grid
        assert feasible
        assert alpha2 == pytest.approx(alpha2_min)
        assert random_sampling[2] <= value * 1.02
        start = DesignTuple(
            alpha1=alpha1, beta=beta, alpha2=alpha2, Pt=float(mathkit.dbm_to_watt(pt_dbm))
        )
        point_spec = config.override("optimizer.alpha2_min", alpha2_min).problem_spec("p0")
        local = LocalSearch(starts=[start]).optimize(point_spec)
        assert local.value >= value * (1.0 - 1e-9)


def test_fig5_compression_monotone(output_dir: Path):
    """
    arrange: Given the fig5 surface on a coarse grid.
    act: Run fig5.
    assert: At every α2_min the optimum does not decrease as κ decreases.
    """
    path = _write(output_dir / "fig5.yaml", "optimizer:\n  steps: [0.05, 0.05, 0.05, 5.0]\n")

    table = _run(["run", "fig5", "--config", str(path)], output_dir / "fig5.csv")

    by_alpha2: dict[float, list[tuple[float, float]]] = {}
    for alpha2_min, kappa, value, *_ in table.rows:
        by_alpha2.setdefault(alpha2_min, []).append((kappa, value))
    for alpha2_min, points in by_alpha2.items():
        values = [value for _, value in sorted(points)]
        assert values == sorted(values, reverse=True), alpha2_min


def test_fig6_network_outage(output_dir: Path, outage_trials: int):
    """
    arrange: Given the fig6 grid.
    act: Run fig6.
    assert: The average network outage stays below the single-SU system outage.
    """
    table = _run(["run", "fig6", "--trials", str(outage_trials)], output_dir / "fig6.csv")

    for single, average in zip(table.column("p_out_single"), table.column("p_out_average")):
        assert average < single


def test_fig7_fewer_active_sus(output_dir: Path):
    """
    arrange: Given Ps = 10 dBm, κ = 1 and J1 at the smallest value of the fig7 grid and at J.
    act: Run fig7.
    assert: The per-SU optimum with ten active SUs is strictly larger than with all of them.
    """
    config = (
        "power:\n  Ps_dbm: 10.0\n"
        "optimizer:\n  steps: [0.05, 0.05, 0.05, 5.0]\n"
        "sweep:\n  - name: network.J1\n    values: [10, 50]\n"
        "  - name: frame.kappa\n    values: [1.0]\n"
    )
    path = _write(output_dir / "fig7.yaml", config)

    table = _run(["run", "fig7", "--config", str(path)], output_dir / "fig7.csv")

    fewest, everyone = table.column("tau_per_su")
    assert fewest > everyone
