"""Measures computed from episode logs: assignment accuracy, fixing-time and
due-date distributions, discounted cost, and the plot-ready CSV emitters.

Everything is recomputable from the logs alone; nothing depends on trainer
internals.  Rejected assignments never produced a fix, so they are excluded
from accuracy and fixing-time aggregation; their bugs re-enter the pool and
are counted at their eventual accepted assignment.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .domain import ScenarioProfile, TriageError
from .environment import EpisodeLog, episode_discounted_cost


class MetricUndefinedError(TriageError):
    """Raised when a metric is requested on logs with no accepted fixes."""


@dataclass(frozen=True)
class DistributionSummary:
    count: int
    mean: float
    median: float
    q1: float
    q3: float
    variance: float
    samples: tuple[float, ...]


def _summarize(samples: Sequence[float]) -> DistributionSummary:
    arr = np.asarray(samples, dtype=float)
    return DistributionSummary(
        count=len(arr),
        mean=float(arr.mean()),
        median=float(np.median(arr)),
        q1=float(np.percentile(arr, 25)),
        q3=float(np.percentile(arr, 75)),
        variance=float(arr.var(ddof=1)) if len(arr) > 1 else 0.0,
        samples=tuple(float(x) for x in arr),
    )


def _accepted(logs: Iterable[EpisodeLog]):
    for log in logs:
        yield from log.accepted_assignments()


def top_k_accuracy(
    logs: Iterable[EpisodeLog], profile: ScenarioProfile, k: int
) -> float:
    """Percentage of accepted assignments landing on one of the k
    fastest-fixing classes for the bug's type; classes tied with the k-th
    fastest all count."""
    hits = 0
    total = 0
    thresholds = {}
    for type_id in range(profile.n_bug_types):
        col = sorted(cls.cost[type_id] for cls in profile.dev_classes)
        thresholds[type_id] = col[min(k, len(col)) - 1]
    for a in _accepted(logs):
        total += 1
        if profile.cost(a.exp_id, a.bug_type) <= thresholds[a.bug_type]:
            hits += 1
    if total == 0:
        raise MetricUndefinedError("no accepted assignments in the logs")
    return 100.0 * hits / total


def fixing_time_stats(logs: Iterable[EpisodeLog]) -> DistributionSummary:
    """Distribution of realized fixing times over accepted assignments."""
    samples = [a.fix_cost for a in _accepted(logs)]
    if not samples:
        raise MetricUndefinedError("no accepted assignments in the logs")
    return _summarize(samples)


def due_date_stats(logs: Iterable[EpisodeLog]) -> DistributionSummary:
    """Distribution of the deadline attribute at assignment time; negative
    samples are late assignments."""
    samples = [float(a.due_at_assignment) for a in _accepted(logs)]
    if not samples:
        raise MetricUndefinedError("no accepted assignments in the logs")
    return _summarize(samples)


def discounted_cost(log: EpisodeLog, gamma: float) -> float:
    """Discounted sum of per-epoch costs plus the terminal penalty."""
    return episode_discounted_cost(log, gamma)


def summary_row(
    name: str, logs: list[EpisodeLog], profile: ScenarioProfile
) -> dict:
    """One comparison-table row for a policy's evaluation logs."""
    fix = fixing_time_stats(logs)
    due = due_date_stats(logs)
    costs = [discounted_cost(log, profile.discount) for log in logs]
    return {
        "policy": name,
        "episodes": len(logs),
        "mean_discounted_cost": float(np.mean(costs)),
        "mean_fixing_time": fix.mean,
        "median_fixing_time": fix.median,
        "top1_accuracy": top_k_accuracy(logs, profile, 1),
        "top3_accuracy": top_k_accuracy(logs, profile, min(3, profile.n_dev_classes)),
        "due_mean": due.mean,
        "due_variance": due.variance,
    }


PLOT_KINDS = ("convergence", "fixing-time-box", "due-date-box", "value-trace")


def emit_plot_data(kind: str, path, **data) -> Path:
    """Write one plot-ready CSV.

    convergence:      rows (iteration, mean_cost, stderr) from ``series``.
    fixing-time-box:  rows (policy, fixing_time) from ``samples_by_policy``.
    due-date-box:     rows (policy, due_at_assignment) likewise.
    value-trace:      rows (iteration, <one column per probe>) from
                      ``traces``.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if kind == "convergence":
        series = data["series"]  # iterable of (iteration, mean, stderr)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "mean_cost", "stderr"])
            for it, mean, stderr in series:
                writer.writerow([it, f"{mean:.6f}", f"{stderr:.6f}"])
    elif kind in ("fixing-time-box", "due-date-box"):
        column = "fixing_time" if kind == "fixing-time-box" else "due_at_assignment"
        samples_by_policy = data["samples_by_policy"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["policy", column])
            for policy, samples in samples_by_policy.items():
                for x in samples:
                    writer.writerow([policy, f"{x:.6f}"])
    elif kind == "value-trace":
        traces = data["traces"]  # name -> series
        names = list(traces)
        length = max(len(s) for s in traces.values()) if names else 0
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration"] + names)
            for i in range(length):
                writer.writerow(
                    [i + 1] + [f"{traces[n][i]:.6f}" for n in names]
                )
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    return path
