from reviewjudge.corpus import corpus_stats
from reviewjudge.plots import (
    plot_category_counts,
    plot_crisp_histogram,
    plot_frequency,
    plot_training_curves,
)
from reviewjudge.siamese import EpochStats, TrainReport

from conftest import make_reviews


def test_category_counts_figure(tmp_path):
    stats = corpus_stats(make_reviews(20))
    out = plot_category_counts(stats, tmp_path / "cats.png")
    assert out.exists() and out.stat().st_size > 0


def test_frequency_figure(tmp_path):
    out = plot_frequency([("the", 90), ("dog", 12), ("ran", 5)], tmp_path / "freq.png")
    assert out.exists() and out.stat().st_size > 0


def test_training_curves_figure(tmp_path):
    report = TrainReport(
        epochs=[
            EpochStats(0.9, 0.5, 0.8, 0.55),
            EpochStats(0.6, 0.7, 0.65, 0.68),
            EpochStats(0.4, 0.8, 0.6, 0.7),
        ],
        stopped_epoch=3,
        best_epoch=3,
    )
    out = plot_training_curves(report, tmp_path / "curves.png")
    assert out.exists() and out.stat().st_size > 0


def test_crisp_histogram_figure(tmp_path):
    out = plot_crisp_histogram([0] * 20 + [5, 9] + [0] * 28, tmp_path / "hist.png")
    assert out.exists() and out.stat().st_size > 0


def test_crisp_histogram_tolerates_empty(tmp_path):
    out = plot_crisp_histogram([], tmp_path / "empty.png")
    assert out.exists()


def test_nested_directories_created(tmp_path):
    out = plot_frequency([("a", 1)], tmp_path / "deep" / "dir" / "f.png")
    assert out.exists()
