"""Result persistence: RFC-4180 CSV, stable-key JSON, tail-curve plot data."""

from __future__ import annotations

import csv
import json
import os
from typing import Dict, List

from ..errors import ConfigError
from .config import ExperimentResult

_TAIL_COLUMNS = ("t", "tail", "bound")


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest round-trip representation
    return str(value)


def emit(result: ExperimentResult, out_dir: str, fmt: str = "csv") -> List[str]:
    """Write rows (csv or json), metadata, and tail-curve plot data.

    Returns the list of files written.  Row files are byte-reproducible for
    identical results; volatile metadata (wall time) stays in the metadata
    file only.
    """
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown output format {fmt!r}")
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, result.experiment_id)
    written: List[str] = []

    if fmt == "csv":
        rows_path = base + ".csv"
        cols = result.columns
        with open(rows_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
            writer.writerow(cols)
            for row in result.rows:
                writer.writerow([_format_cell(row.get(c, "")) for c in cols])
        written.append(rows_path)
    else:
        rows_path = base + ".json"
        with open(rows_path, "w", encoding="utf-8") as fh:
            json.dump(result.rows, fh, sort_keys=True, indent=1, default=float)
            fh.write("\n")
        written.append(rows_path)

    meta_path = base + ".meta.json"
    meta = dict(result.metadata)
    meta["experiment_id"] = result.experiment_id
    meta["verdict"] = result.verdict
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=1, default=str)
        fh.write("\n")
    written.append(meta_path)

    if result.rows and all(c in result.rows[0] for c in _TAIL_COLUMNS):
        plot_path = base + ".plot.csv"
        with open(plot_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\r\n")
            writer.writerow(_TAIL_COLUMNS)
            for row in result.rows:
                writer.writerow([_format_cell(row[c]) for c in _TAIL_COLUMNS])
        written.append(plot_path)
    return written


def read_rows_json(path: str) -> List[Dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
