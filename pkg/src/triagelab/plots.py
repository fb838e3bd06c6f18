"""Figure rendering for the report path: each emitter takes the same data as
its CSV counterpart in :mod:`triagelab.metrics` and writes a PNG next to it.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_convergence(series, path, title="Inner-simulation cost") -> Path:
    path = Path(path)
    iters = [row[0] for row in series]
    means = [row[1] for row in series]
    errs = [row[2] for row in series]
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.errorbar(iters, means, yerr=errs, marker="o", markersize=3,
                linewidth=1.2, capsize=2)
    if means:
        ax.axhline(means[0], linestyle="--", linewidth=1.0, alpha=0.7,
                   label="iteration-0 policy")
        ax.legend(frameon=False)
    ax.set_xlabel("training iteration")
    ax.set_ylabel("mean discounted cost")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_box(samples_by_policy, path, ylabel, title) -> Path:
    path = Path(path)
    labels = list(samples_by_policy)
    data = [samples_by_policy[k] for k in labels]
    fig, ax = plt.subplots(figsize=(1.8 + 1.4 * len(labels), 4.2))
    ax.boxplot(data, tick_labels=labels, showfliers=True)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_value_trace(traces, path, title="Value estimates") -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4.2))
    for name, series in traces.items():
        ax.plot(range(1, len(series) + 1), series, linewidth=1.2, label=name)
    ax.set_xlabel("training iteration")
    ax.set_ylabel("estimated value")
    ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
