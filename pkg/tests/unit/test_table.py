# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Unit tests for result tables."""

import math
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from harness.table import (
    TOOL_VERSION,
    ResultTable,
    build_metadata,
    emit_table,
    format_cell,
    parse_cell,
    read_table,
    render_table,
)
from state.config import ExperimentConfig, load_config


@pytest.mark.parametrize(
    "value, expected",
    [
        pytest.param(True, "true", id="bool"),
        pytest.param(np.bool_(False), "false", id="numpy bool"),
        pytest.param(np.int64(12), "12", id="numpy int"),
        pytest.param(0.1, "0.1", id="shortest decimal"),
        pytest.param(np.float64(1e-12), "1e-12", id="numpy float"),
        pytest.param("grid", "grid", id="text"),
    ],
)
def test_format_cell(value, expected: str):
    """
    arrange: Given cells of every supported type.
    act: Format them.
    assert: Booleans are lower case and floats use the shortest round-trip decimal.
    """
    assert format_cell(value) == expected


@pytest.mark.parametrize(
    "text, expected",
    [
        pytest.param("true", True, id="bool"),
        pytest.param("7", 7, id="int"),
        pytest.param("0.30000000000000004", 0.1 + 0.2, id="float"),
        pytest.param("local", "local", id="text"),
    ],
)
def test_parse_cell(text: str, expected):
    """
    arrange: Given formatted cells.
    act: Parse them.
    assert: The typed value is recovered.
    """
    parsed = parse_cell(text)

    assert parsed == expected and type(parsed) is type(expected)


def test_parse_cell_nan():
    """
    arrange: Given a formatted NaN.
    act: Parse it.
    assert: A float NaN is returned.
    """
    assert math.isnan(parse_cell(format_cell(math.nan)))


def test_rectangular():
    """
    arrange: Given a row shorter than the header.
    act: Build the table.
    assert: A validation error is raised.
    """
    with pytest.raises(ValidationError):
        ResultTable(columns=("a", "b"), rows=((1,),), metadata={})


def test_flagged():
    """
    arrange: Given rows whose feasible flag is True, False and True.
    act: Count the flagged rows.
    assert: One row is flagged; a table without flag columns has none.
    """
    table = ResultTable(
        columns=("method", "feasible"),
        rows=(("grid", True), ("random", False), ("local", True)),
        metadata={},
    )
    plain = ResultTable(columns=("x",), rows=((False,),), metadata={})

    assert table.flagged() == 1
    assert plain.flagged() == 0
    assert table.column("method") == ["grid", "random", "local"]


def test_render_table(experiment_config: ExperimentConfig):
    """
    arrange: Given a one-row table with run metadata.
    act: Render it.
    assert: A # preamble precedes the header and the row.
    """
    metadata = build_metadata(experiment_config)
    table = ResultTable(columns=("lambda_p", "p_out"), rows=((1e-3, 0.25),), metadata=metadata)

    lines = render_table(table).splitlines()

    assert lines[0] == f"# config_sha256: {experiment_config.sha256()}"
    assert f"# version: {TOOL_VERSION}" in lines
    assert lines[-2:] == ["lambda_p,p_out", "0.001,0.25"]


def test_emit_and_read_table(tmp_path: Path, experiment_config: ExperimentConfig):
    """
    arrange: Given a table with mixed cell types.
    act: Emit it with its configuration and read both back.
    assert: The table and the resolved configuration are recovered.
    """
    table = ResultTable(
        columns=("method", "tau_opt", "evaluations", "feasible"),
        rows=(("grid", 1.2345678901234567, 4096, True), ("random", math.pi, 10, False)),
        metadata=build_metadata(experiment_config),
    )
    path = tmp_path / "out" / "fig4.csv"

    emit_table(table, path, experiment_config)

    assert read_table(path) == table
    assert load_config(f"{path}.config.yaml") == experiment_config


def test_emit_table_without_config(tmp_path: Path):
    """
    arrange: Given no configuration.
    act: Emit a table.
    assert: Only the table is written.
    """
    path = tmp_path / "table.csv"

    emit_table(ResultTable(columns=("x",), rows=((1,),), metadata={}), path, None)

    assert [entry.name for entry in tmp_path.iterdir()] == ["table.csv"]
