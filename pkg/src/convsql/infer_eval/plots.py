"""Plot rendering for evaluation reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def plot_per_turn_curve(reports: dict[str, dict], out_path) -> None:
    """Strict denotation accuracy as interactions progress, one line per system."""
    fig, ax = plt.subplots(figsize=(6, 3.2))
    for label, report in reports.items():
        curve = {int(k): v for k, v in report["per_turn_strict"].items()}
        xs = sorted(curve)
        ax.plot(xs, [100.0 * curve[x] for x in xs], label=label, linewidth=1.6)
    ax.set_xlabel("Interaction turn")
    ax.set_ylabel("Strict denotation (%)")
    ax.set_ylim(0, 102)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_history_sweep(points: dict[str, dict[int, float]], out_path) -> None:
    """Strict denotation accuracy as a function of the history window h."""
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    for label, series in points.items():
        xs = sorted(series)
        ax.plot(xs, [100.0 * series[x] for x in xs], marker="o", label=label)
    ax.set_xlabel("History length h")
    ax.set_ylabel("Strict denotation (%)")
    ax.set_xticks(sorted({x for s in points.values() for x in s}))
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
