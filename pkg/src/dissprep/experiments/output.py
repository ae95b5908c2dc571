"""CSV serialization of sweep results."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .config import ExperimentConfig
from .sweeps import SweepResult


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    return str(value)


def to_csv_text(result: SweepResult, cfg: ExperimentConfig, timing: bool = True) -> str:
    """Render ``result`` as CSV preceded by a one-line ``#`` JSON config echo.

    With ``timing=False`` the wall-time column is written as zero, which makes
    the file byte-identical across runs of the same config and seed.
    """
    echo = {"kind": result.kind, "config": cfg.to_json_dict(), **result.header}
    buf = io.StringIO()
    buf.write("# " + json.dumps(echo, sort_keys=True, separators=(",", ":")) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        values = []
        for col in result.columns:
            value = row.get(col, "")
            if col == "wall_time_seconds" and not timing:
                value = 0.0
            values.append(format_value(value))
        writer.writerow(values)
    return buf.getvalue()


def write_csv(result: SweepResult, cfg: ExperimentConfig, path, timing: bool = True) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_csv_text(result, cfg, timing))
    return path


def read_csv(path) -> tuple[dict, list[dict]]:
    """Parse a file written by :func:`write_csv` into (header echo, rows)."""
    lines = Path(path).read_text().splitlines()
    header = json.loads(lines[0][2:])
    rows = list(csv.DictReader(lines[1:]))
    return header, rows
