# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Comma-separated result tables with a metadata preamble."""

import csv
import io
import logging
import typing
from pathlib import Path

import numpy as np
from pydantic import model_validator
from pydantic.dataclasses import dataclass

from state.config import ExperimentConfig, dump_config

logger = logging.getLogger(__name__)

TOOL_VERSION = "wpcr-frame-design 0.1.0"
METADATA_PREFIX = "# "
# Columns whose False value marks a row as a failed computation.
FLAG_COLUMNS = ("feasible", "converged", "passed")

Cell = typing.Union[bool, int, float, str]


@dataclass(frozen=True)
class ResultTable:
    """Rectangular result table.

    Attributes:
        columns: Column headers.
        rows: Typed rows.
        metadata: Preamble entries (config hash, seed, version, scenario).
    """

    columns: tuple[str, ...]
    rows: tuple[tuple[typing.Any, ...], ...]
    metadata: dict[str, str]

    @model_validator(mode="after")
    def check_rectangular(self) -> "ResultTable":
        """Validate that every row has one cell per column.

        Returns:
            The validated table.

        Raises:
            ValueError: if a row length differs from the header.
        """
        width = len(self.columns)
        for index, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {index} has {len(row)} cells, expected {width}")
        return self

    def column(self, name: str) -> list[typing.Any]:
        """Return the cells of one column.

        Args:
            name: Column header.

        Returns:
            The cells in row order.
        """
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def flagged(self) -> int:
        """Return the number of rows marked as failed by a flag column."""
        indices = [self.columns.index(name) for name in FLAG_COLUMNS if name in self.columns]
        return sum(1 for row in self.rows if any(row[index] is False for index in indices))


def build_metadata(config: ExperimentConfig) -> dict[str, str]:
    """Return the preamble identifying a run.

    Args:
        config: Resolved configuration of the run.

    Returns:
        config_sha256, seed, version and scenario entries.
    """
    return {
        "config_sha256": config.sha256(),
        "seed": str(config.experiment.base_seed),
        "version": TOOL_VERSION,
        "scenario": config.experiment.scenario,
    }


def format_cell(value: typing.Any) -> str:
    """Render a cell; floats use the shortest round-trip decimal.

    Args:
        value: Cell value.

    Returns:
        The text of the cell.
    """
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def parse_cell(text: str) -> Cell:
    """Parse a cell written by format_cell.

    Args:
        text: Cell text.

    Returns:
        A bool, int, float or the text itself.
    """
    if text in ("true", "false"):
        return text == "true"
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            continue
    return text


def render_table(table: ResultTable) -> str:
    """Render the preamble, header and rows.

    Args:
        table: Result table.

    Returns:
        The CSV text.
    """
    buffer = io.StringIO()
    for key, value in table.metadata.items():
        buffer.write(f"{METADATA_PREFIX}{key}: {value}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    writer.writerows([format_cell(cell) for cell in row] for row in table.rows)
    return buffer.getvalue()


def emit_table(
    table: ResultTable, path: typing.Union[str, Path], config: typing.Optional[ExperimentConfig]
) -> None:
    """Write a table and, when given, the resolved configuration to <path>.config.yaml.

    Args:
        table: Result table.
        path: Output path.
        config: Resolved configuration echoed next to the table.
    """
    output = Path(path)
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(render_table(table), encoding="utf-8")
    if config is not None:
        Path(f"{output}.config.yaml").write_text(dump_config(config), encoding="utf-8")
    logger.info("Wrote %d rows to %s", len(table.rows), output)


def read_table(path: typing.Union[str, Path]) -> ResultTable:
    """Parse a table written by emit_table.

    Args:
        path: Table path.

    Returns:
        ResultTable: metadata, header and typed rows.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    metadata: dict[str, str] = {}
    body_start = 0
    for body_start, line in enumerate(lines):
        if not line.startswith(METADATA_PREFIX):
            break
        key, _, value = line[len(METADATA_PREFIX) :].partition(": ")
        metadata[key] = value
    reader = csv.reader(lines[body_start:])
    columns = tuple(next(reader))
    rows = tuple(tuple(parse_cell(cell) for cell in row) for row in reader)
    return ResultTable(columns=columns, rows=rows, metadata=metadata)

