"""JSON and CSV report writers.

Reports hold no timestamps or host data, so a fixed configuration and seed
give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np

REPORT_VERSION = "hardy-lab/1"

SWEEP_COLUMNS = (
    "domain",
    "ineq",
    "p",
    "band_a",
    "band_b",
    "profile",
    "resolution",
    "lhs",
    "rhs",
    "ratio",
    "min_weight",
    "converged",
)


def _plain(value: Any) -> Any:
    """JSON-safe copy; non-finite floats become ``"inf"``, ``"-inf"`` or
    ``"nan"``."""
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, complex):
        return [_plain(value.real), _plain(value.imag)]
    return value


def build_report(
    config: Mapping[str, Any],
    results: Sequence[Mapping[str, Any]],
    *,
    tolerances: Mapping[str, float],
    truncations: Mapping[str, float],
    seed: int,
) -> dict[str, Any]:
    return _plain(
        {
            "version": REPORT_VERSION,
            "config": config,
            "results": list(results),
            "environment": {
                "tolerances": tolerances,
                "truncations": truncations,
                "seed": seed,
            },
        }
    )


def dumps_json(report: Mapping[str, Any]) -> str:
    return (
        json.dumps(_plain(report), sort_keys=True, indent=2, allow_nan=False)
        + "\n"
    )


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if value is None:
        return ""
    return str(value)


def dumps_csv(
    rows: Iterable[Mapping[str, Any]], columns: Sequence[str]
) -> str:
    """RFC-4180 table with a header row and CRLF line endings."""
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buffer.getvalue()


def sort_rows(
    rows: Iterable[Mapping[str, Any]], key: Sequence[str]
) -> list[Mapping[str, Any]]:
    """Rows ordered by the textual form of their configuration columns."""
    return sorted(rows, key=lambda r: tuple(_cell(r.get(k)) for k in key))


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_bytes(text.encode("utf-8"))


__all__ = [
    "REPORT_VERSION",
    "SWEEP_COLUMNS",
    "build_report",
    "dumps_csv",
    "dumps_json",
    "sort_rows",
    "write_text",
]
