"""Figure rendering for the report paths.

Every CLI report that writes delimited/JSON output also drops a PNG next to
it: category counts for stats, top-token bars for frequency, loss/accuracy
curves for training, and the crisp-score histogram for the fuzzy stage.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .corpus import CorpusStats
from .siamese import TrainReport

_RC = {
    "figure.figsize": (8.0, 4.5),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _new_axes():
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
    return fig, ax


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_category_counts(stats: CorpusStats, path: str | Path) -> Path:
    fig, ax = _new_axes()
    names = list(stats.per_category)
    x = range(len(names))
    width = 0.4
    ax.bar([i - width / 2 for i in x], [stats.per_category[n].fake_count for n in names],
           width=width, label="fake (CG)")
    ax.bar([i + width / 2 for i in x], [stats.per_category[n].real_count for n in names],
           width=width, label="real (OG)")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("reviews")
    ax.set_title("Reviews per category")
    ax.legend()
    return _save(fig, path)


def plot_frequency(entries: list[tuple[str, int]], path: str | Path,
                   title: str = "Most frequent tokens") -> Path:
    fig, ax = _new_axes()
    tokens = [t for t, _ in entries][::-1]
    counts = [c for _, c in entries][::-1]
    ax.barh(tokens, counts)
    ax.set_xlabel("count")
    ax.set_title(title)
    return _save(fig, path)


def plot_training_curves(report: TrainReport, path: str | Path) -> Path:
    fig, ax = _new_axes()
    epochs = range(1, len(report.epochs) + 1)
    ax.plot(epochs, [e.train_loss for e in report.epochs], label="train loss")
    ax.plot(epochs, [e.val_loss for e in report.epochs], label="val loss")
    ax2 = ax.twinx()
    ax2.plot(epochs, [e.train_acc for e in report.epochs], "--", label="train acc")
    ax2.plot(epochs, [e.val_acc for e in report.epochs], "--", label="val acc")
    ax2.set_ylabel("accuracy")
    ax2.set_ylim(0.0, 1.0)
    ax.axvline(report.best_epoch, color="gray", lw=0.8)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title("Training curves")
    lines, labels = ax.get_legend_handles_labels()
    lines2, labels2 = ax2.get_legend_handles_labels()
    ax.legend(lines + lines2, labels + labels2, loc="center right", fontsize=8)
    return _save(fig, path)


def plot_crisp_histogram(histogram: list[int], path: str | Path) -> Path:
    fig, ax = _new_axes()
    bins = max(len(histogram), 1)
    centers = [(i + 0.5) / bins for i in range(len(histogram))]
    ax.bar(centers, histogram, width=1.0 / bins, align="center")
    ax.set_xlabel("crisp realness score")
    ax.set_ylabel("reviews")
    ax.set_title("Fuzzy output distribution")
    ax.set_xlim(0.0, 1.0)
    return _save(fig, path)
