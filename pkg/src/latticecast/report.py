"""CSV and JSON renderings of simulation summaries."""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .simulate import SummaryStats

CSV_COLUMNS = (
    "receiver_index",
    "rank_S",
    "sigma2",
    "snr_db",
    "trials",
    "errors",
    "error_rate",
    "ci_low",
    "ci_high",
    "threshold_satisfied",
    "capacity_term_bits",
)

FORMATS = ("csv", "json")


def to_csv(summary: SummaryStats) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in summary.receivers:
        row = r.model_dump()
        writer.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def to_json(summary: SummaryStats) -> str:
    return summary.model_dump_json(indent=2) + "\n"


def from_json(text: str) -> SummaryStats:
    return SummaryStats.model_validate_json(text)


def render(summary: SummaryStats, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(summary)
    if fmt == "json":
        return to_json(summary)
    raise ValueError(f"format must be one of {FORMATS}")


def write(summary: SummaryStats, path: str | Path, fmt: str) -> None:
    Path(path).write_text(render(summary, fmt))
