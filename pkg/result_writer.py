"""
result_writer.py — Plot-ready CSV and JSON export of SBTS experiment results.

This module writes what the simulator produces for external charting tools:

- curves CSV: level,task_index,mean_success_rate,sample_count (one row per point)
- topic curves CSV: the same, broken down by topic
- onsets CSV: level,runs,p5,p50,p95 (first-attempt task index percentiles)
- summary JSON: the run manifest plus the comparison table

Every file can be read back with the matching reader; values round-trip
exactly at the printed precision.

License: MIT
"""

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Sequence

from experiment_harness import LevelOnset, MetricsAggregate, SummaryRow, level_onsets

logger = logging.getLogger(__name__)

CURVES_HEADER = ["level", "task_index", "mean_success_rate", "sample_count"]
TOPIC_CURVES_HEADER = ["topic", "level", "task_index", "mean_success_rate", "sample_count"]
ONSETS_HEADER = ["level", "runs", "p5", "p50", "p95"]


class ExportError(RuntimeError):
    """Writing or reading a result file failed."""

    def __init__(self, path: str, cause: Exception):
        super().__init__(f"{path}: {getattr(cause, 'strerror', None) or cause}")
        self.path = path
        self.cause = cause


@dataclass
class RunManifest:
    """
    Everything needed to reproduce a run.

    Attributes:
        command (str): "run", "compare" or "sweep".
        version (str): Simulator version.
        master_seed (int): Seed of the baseline configuration.
        configs (dict): Label -> resolved flat config document (see profile_manager).
        outputs (dict): Output kind -> path.
        duration_seconds (float): Wall-clock duration; the only non-reproducible field.
    """

    command: str
    version: str
    master_seed: int
    configs: Dict[str, Dict[str, Any]]
    outputs: Dict[str, str] = field(default_factory=dict)
    duration_seconds: float = 0.0


def _fmt_rate(rate: float) -> str:
    return f"{rate:.6f}"


def _fmt_optional(value: float) -> str:
    return "" if math.isnan(value) else f"{value:.1f}"


def _write_rows(path: str, header: Sequence[str], rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise ExportError(path, e) from e
    logger.info("Wrote %s", path)


def write_curves_csv(aggregate: MetricsAggregate, path: str) -> None:
    """
    Write per-level curves, rows sorted by (level, task_index).

    Raises:
        ExportError: On I/O failure, naming the path.
    """
    def rows():
        for level in sorted(aggregate.level_curves):
            for point in aggregate.level_curves[level].points:
                yield [level, point.task_index, _fmt_rate(point.mean_success_rate), point.sample_count]

    _write_rows(path, CURVES_HEADER, rows())


def write_topic_curves_csv(aggregate: MetricsAggregate, path: str) -> None:
    if aggregate.topic_curves is None:
        raise ValueError("aggregate has no per-topic curves; run the cohort with by_topic=True")

    def rows():
        for topic, level in sorted(aggregate.topic_curves):
            for point in aggregate.topic_curves[(topic, level)].points:
                yield [topic, level, point.task_index, _fmt_rate(point.mean_success_rate), point.sample_count]

    _write_rows(path, TOPIC_CURVES_HEADER, rows())


def write_onsets_csv(aggregate: MetricsAggregate, path: str) -> None:
    """Percentiles are blank for levels no run reached."""
    rows = (
        [o.level, o.runs, _fmt_optional(o.p5), _fmt_optional(o.p50), _fmt_optional(o.p95)]
        for o in level_onsets(aggregate).values()
    )
    _write_rows(path, ONSETS_HEADER, rows)


def summary_document(table: Sequence[SummaryRow], manifest: RunManifest) -> Dict[str, Any]:
    return {
        "manifest": asdict(manifest),
        "rows": [
            {
                "label": row.label,
                "expected_level_mean": row.expected_level_mean,
                "expected_level_std": row.expected_level_std,
                "pct_change_vs_baseline": row.pct_change_vs_baseline,
            }
            for row in table
        ],
    }


def write_summary_json(table: Sequence[SummaryRow], manifest: RunManifest, path: str) -> None:
    """
    Write the manifest and the comparison table as one JSON document.

    Raises:
        ExportError: On I/O failure, naming the path.
    """
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(summary_document(table, manifest), f, indent=2)
            f.write("\n")
    except OSError as e:
        raise ExportError(path, e) from e
    logger.info("Wrote %s", path)


def read_curves_csv(path: str) -> Dict[int, List[tuple]]:
    """Level -> [(task_index, mean_success_rate, sample_count), ...] as written."""
    curves: Dict[int, List[tuple]] = {}
    try:
        with open(path, newline="", encoding="utf-8") as f:
            for row in csv.DictReader(f):
                curves.setdefault(int(row["level"]), []).append(
                    (int(row["task_index"]), float(row["mean_success_rate"]), int(row["sample_count"]))
                )
    except OSError as e:
        raise ExportError(path, e) from e
    return curves


def read_onsets_csv(path: str) -> Dict[int, LevelOnset]:
    def value(text: str) -> float:
        return float(text) if text else float("nan")

    try:
        with open(path, newline="", encoding="utf-8") as f:
            return {
                int(row["level"]): LevelOnset(
                    int(row["level"]), int(row["runs"]), value(row["p5"]), value(row["p50"]), value(row["p95"])
                )
                for row in csv.DictReader(f)
            }
    except OSError as e:
        raise ExportError(path, e) from e


def read_summary_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise ExportError(path, e) from e
