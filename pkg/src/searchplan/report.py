"""Figure rendering for solver comparison runs.

Turns the rows produced by ``searchplan compare`` into two summary figures
(gap to the per-instance best, and runtime) written next to the CSV output.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _label(row: dict) -> str:
    c = row.get("C")
    return f"{row['solver']}@C{c}" if c not in (None, "") else str(row["solver"])


def _grouped(rows: list[dict], key: str) -> tuple[list[str], list[list[float]]]:
    labels: list[str] = []
    buckets: dict[str, list[float]] = {}
    for row in rows:
        value = row.get(key)
        if value in (None, ""):
            continue
        label = _label(row)
        if label not in buckets:
            labels.append(label)
            buckets[label] = []
        buckets[label].append(float(value))
    return labels, [buckets[label] for label in labels]


def _boxplot(labels, series, ylabel, title, path, log=False):
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(labels) + 1.5), 4.0))
    if series:
        ax.boxplot(series, tick_labels=labels, showmeans=True)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if log:
        ax.set_yscale("log")
    ax.grid(True, axis="y", alpha=0.3)
    fig.autofmt_xdate(rotation=30)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_compare_report(rows: list[dict], out_dir: str) -> list[str]:
    """Write gap and runtime figures for comparison rows; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    labels, gaps = _grouped(rows, "gap_to_best")
    path = os.path.join(out_dir, "gaps.png")
    _boxplot(labels, gaps, "gap to best probability", "Solution quality", path)
    written.append(path)
    labels, runtimes = _grouped(rows, "runtime_ms")
    path = os.path.join(out_dir, "runtimes.png")
    _boxplot(labels, runtimes, "runtime [ms]", "Solver runtime", path, log=True)
    written.append(path)
    return written
