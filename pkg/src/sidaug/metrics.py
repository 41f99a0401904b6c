"""Ranking and aggregate metrics: AP, mAP, mAP gain, accuracy.

AP follows the standard information-retrieval definition: precision at
each positive item's rank in the score-sorted list, averaged over
positives. Ties are broken by stable original order. Accuracy
thresholds the sigmoid probability at 0.5, with probability exactly 0.5
counted as a negative prediction.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, UndefinedMetricError

REPORT_SCHEMA_VERSION = 1
CSV_FIELDS = ("run_id", "scenario", "dataset", "ap", "accuracy", "map", "map_gain_percent")


@dataclass(frozen=True)
class ScoredSet:
    """Scores (higher = more synthetic) with 0/1 labels for one dataset."""

    scores: np.ndarray
    labels: np.ndarray
    dataset_name: str = ""

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        labels = np.asarray(self.labels)
        if scores.shape != labels.shape or scores.ndim != 1:
            raise ParameterError(
                f"scores/labels must be equal-length vectors, got {scores.shape} vs {labels.shape}"
            )
        if scores.size == 0:
            raise ParameterError("scored set must be nonempty")
        if not np.all((labels == 0) | (labels == 1)):
            raise ParameterError("labels must be 0 or 1")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels.astype(np.int64))


def average_precision(scored: ScoredSet) -> float:
    """Mean precision at each positive's rank, descending-score order."""
    if scored.labels.sum() == 0:
        raise UndefinedMetricError(f"AP undefined without positives ({scored.dataset_name!r})")
    order = np.argsort(-scored.scores, kind="stable")
    ranked = scored.labels[order]
    hits = np.cumsum(ranked)
    ranks = np.arange(1, ranked.size + 1)
    precisions = hits[ranked == 1] / ranks[ranked == 1]
    return float(precisions.mean())


def mean_average_precision(aps) -> float:
    aps = list(aps)
    if not aps:
        raise ParameterError("mAP needs at least one dataset AP")
    return float(np.mean(aps))


def map_gain(map_value: float, map_baseline: float) -> float:
    """Relative mAP improvement over the baseline, in percent."""
    if map_baseline <= 0:
        raise ParameterError(f"baseline mAP must be > 0, got {map_baseline}")
    return (map_value - map_baseline) / map_baseline * 100.0


def accuracy(scored: ScoredSet, threshold: float = 0.5) -> float:
    """Fraction of correct hard decisions; score > threshold predicts 1."""
    predictions = (scored.scores > threshold).astype(np.int64)
    return float((predictions == scored.labels).mean())


@dataclass(frozen=True)
class MetricsReport:
    """Per-dataset AP and accuracy under one scenario, plus their mAP."""

    scenario_name: str
    per_dataset_ap: dict
    accuracy_per_dataset: dict
    map: float

    def __post_init__(self):
        if set(self.per_dataset_ap) != set(self.accuracy_per_dataset):
            raise ParameterError("AP and accuracy maps must cover the same datasets")
        expected = float(np.mean(list(self.per_dataset_ap.values())))
        if abs(expected - self.map) > 1e-12:
            raise ParameterError(
                f"mAP {self.map} is not the mean of the per-dataset APs ({expected})"
            )
        for value in list(self.per_dataset_ap.values()) + list(self.accuracy_per_dataset.values()):
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"metric values must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class GainReport:
    map: float
    map_baseline: float
    gain_percent: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        expected = map_gain(self.map, self.map_baseline)
        if self.gain_percent is None:
            object.__setattr__(self, "gain_percent", expected)
        elif abs(self.gain_percent - expected) > 1e-9:
            raise ParameterError(
                f"inconsistent gain: stated {self.gain_percent}, computed {expected}"
            )


def write_reports_csv(path, run_id: str, reports, meta: dict, gains: dict | None = None) -> None:
    """One row per dataset x scenario; metadata in leading comment lines."""
    gains = gains or {}
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema_version={REPORT_SCHEMA_VERSION}\n")
        for key in sorted(meta):
            fh.write(f"# {key}={meta[key]}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for report in reports:
            gain = gains.get(report.scenario_name)
            for ds in sorted(report.per_dataset_ap):
                writer.writerow(
                    [
                        run_id,
                        report.scenario_name,
                        ds,
                        repr(report.per_dataset_ap[ds]),
                        repr(report.accuracy_per_dataset[ds]),
                        repr(report.map),
                        "" if gain is None else repr(gain.gain_percent),
                    ]
                )


def write_reports_json(path, run_id: str, reports, meta: dict, gains: dict | None = None) -> None:
    gains = gains or {}
    doc = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "run_id": run_id,
        **meta,
        "scenarios": [
            {
                "scenario": r.scenario_name,
                "per_dataset_ap": dict(sorted(r.per_dataset_ap.items())),
                "accuracy_per_dataset": dict(sorted(r.accuracy_per_dataset.items())),
                "map": r.map,
                "gain": None
                if r.scenario_name not in gains
                else {
                    "map": gains[r.scenario_name].map,
                    "map_baseline": gains[r.scenario_name].map_baseline,
                    "gain_percent": gains[r.scenario_name].gain_percent,
                },
            }
            for r in reports
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_report_csv(path) -> tuple[dict, list[dict]]:
    """Parse a report CSV back into (meta, rows); used by report merging."""
    meta: dict[str, str] = {}
    rows: list[dict] = []
    with open(path, newline="") as fh:
        header: list[str] | None = None
        for line in fh:
            if line.startswith("#"):
                text = line[1:].strip()
                if "=" in text:
                    key, value = text.split("=", 1)
                    meta[key.strip()] = value.strip()
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header = cells
                if tuple(header) != CSV_FIELDS:
                    raise ParameterError(f"{path}: unexpected CSV header {header}")
                continue
            rows.append(dict(zip(header, cells)))
    if "schema_version" not in meta:
        raise ParameterError(f"{path}: missing schema_version metadata")
    return meta, rows
