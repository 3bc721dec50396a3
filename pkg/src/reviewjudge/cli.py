"""Command-line entry point.

Subcommands: stats, preprocess, train-w2v, train, evaluate, classify.
Progress and log lines go to stderr; machine-readable JSON goes to files in
the output directory (and stdout where noted), with report figures rendered
alongside.  Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv as csv_module
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import context, corpus, fuzzy, pipeline, plots, preprocess, siamese, word2vec
from .config import DEFAULT_SEED, ConfigError, PipelineConfig, load_config

logger = logging.getLogger("reviewjudge")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


def _resolve_seed(args, cfg: PipelineConfig) -> int:
    """Flag > config file > REVIEWJUDGE_SEED env var > default."""
    if args.seed is not None:
        return args.seed
    if cfg.seed is not None:
        return cfg.seed
    env = os.environ.get("REVIEWJUDGE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"REVIEWJUDGE_SEED is not an integer: {env!r}") from exc
    return DEFAULT_SEED


def _apply_overrides(args, cfg: PipelineConfig) -> PipelineConfig:
    if getattr(args, "dataset", None):
        cfg.dataset_path = Path(args.dataset)
    if getattr(args, "stopwords", None):
        cfg.stopwords_path = Path(args.stopwords)
    if getattr(args, "output_dir", None):
        cfg.output_dir = Path(args.output_dir)
    if getattr(args, "length_unit", None):
        cfg.length_unit = args.length_unit
    if getattr(args, "workers", None) is not None:
        cfg.workers = args.workers
    if getattr(args, "fixed_window", False):
        cfg.w2v = word2vec.W2VConfig(
            **{**cfg.w2v.__dict__, "fixed_window": True}
        )
    if getattr(args, "shared_weights", False):
        cfg.model.shared_weights = True
    if getattr(args, "store", None):
        cfg.context_mode = "store"
        cfg.context_store = Path(args.store)
    if getattr(args, "fuzzy_config", None):
        cfg.fuzzy_config = Path(args.fuzzy_config)
    cfg.seed = _resolve_seed(args, cfg)
    overrides = {"seed": cfg.seed}
    if cfg.workers is not None:
        overrides["workers"] = cfg.workers
    cfg.w2v = word2vec.W2VConfig(**{**cfg.w2v.__dict__, **overrides})
    return cfg


def _stopword_list(cfg: PipelineConfig) -> preprocess.StopwordList:
    if cfg.stopwords_path is not None:
        return preprocess.load_stopwords(cfg.stopwords_path)
    return preprocess.builtin_stopwords()


def _fuzzy_setup(cfg: PipelineConfig) -> tuple[fuzzy.FuzzySetPair, float]:
    if cfg.fuzzy_config is not None:
        return fuzzy.load_membership_config(cfg.fuzzy_config)
    return fuzzy.default_sets(), cfg.fuzzy_threshold


def _write_json(path: Path, payload) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def cmd_stats(args, cfg: PipelineConfig) -> int:
    cfg.validate(need_dataset=True)
    reviews = corpus.load_reviews(cfg.dataset_path, skip_invalid=args.skip_invalid)
    stats = corpus.corpus_stats(reviews, length_unit=cfg.length_unit)
    out = cfg.output_dir
    _write_json(out / "stats.json", stats.to_dict())
    with (out / "stats.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv_module.writer(fh)
        writer.writerow(["category", "fake_count", "fake_avg_len", "real_count", "real_avg_len"])
        for name, s in stats.per_category.items():
            writer.writerow([name, s.fake_count, round(s.fake_avg_len), s.real_count, round(s.real_avg_len)])
        writer.writerow(["total", stats.fake_total, "", stats.real_total, ""])
    plots.plot_category_counts(stats, out / "categories.png")
    if not args.json_only:
        print(corpus.format_stats_table(stats))
    logger.info("stats written to %s", out)
    return EXIT_OK


def cmd_preprocess(args, cfg: PipelineConfig) -> int:
    cfg.validate(need_dataset=True)
    reviews = corpus.load_reviews(cfg.dataset_path, skip_invalid=True)
    stopwords = _stopword_list(cfg)
    if args.tokens_out:
        tokens_path = Path(args.tokens_out)
        tokens_path.parent.mkdir(parents=True, exist_ok=True)
        with tokens_path.open("w", encoding="utf-8") as fh:
            for review in reviews:
                tok = preprocess.preprocess_review(review, stopwords)
                fh.write(
                    json.dumps({"id": tok.review_id, "tokens": list(tok.tokens)}) + "\n"
                )
        logger.info("cleaned tokens written to %s", tokens_path)
    table = preprocess.frequency_table(reviews, stage=args.stage, stopwords=stopwords)
    top = table.top(args.top)
    out = cfg.output_dir
    _write_json(out / f"frequency_{args.stage}.json", [[t, c] for t, c in top])
    with (out / f"frequency_{args.stage}.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv_module.writer(fh)
        writer.writerow(["token", "count"])
        writer.writerows(top)
    plots.plot_frequency(
        top[: min(len(top), 30)],
        out / f"frequency_{args.stage}.png",
        title=f"Most frequent tokens ({args.stage})",
    )
    if not args.json_only:
        print(json.dumps([[t, c] for t, c in top]))
    return EXIT_OK


def _train_or_load_w2v(cfg: PipelineConfig, tokenized, w2v_path: Path | None):
    if w2v_path is not None:
        logger.info("loading word2vec embeddings from %s", w2v_path)
        return word2vec.load_embeddings(w2v_path)
    logger.info(
        "training word2vec: dim=%d window=%d epochs=%d workers=%d",
        cfg.w2v.dim, cfg.w2v.window, cfg.w2v.epochs, cfg.w2v.workers,
    )
    return word2vec.train_skipgram(tokenized, cfg.w2v)


def cmd_train_w2v(args, cfg: PipelineConfig) -> int:
    cfg.validate(need_dataset=True)
    reviews = corpus.load_reviews(cfg.dataset_path, skip_invalid=True)
    stopwords = _stopword_list(cfg)
    tokenized = preprocess.preprocess_corpus(reviews, stopwords)
    matrix, vocab = word2vec.train_skipgram(tokenized, cfg.w2v)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    word2vec.save_embeddings(out / "embeddings.w2v", matrix)
    if args.text_out:
        word2vec.save_embeddings_text(out / "embeddings.txt", matrix)
    summary = {
        "vocab_size": len(vocab),
        "dim": matrix.dim,
        "epochs": cfg.w2v.epochs,
        "epoch_losses": matrix.epoch_losses,
    }
    _write_json(out / "w2v_summary.json", summary)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def _prepare_pipeline(cfg: PipelineConfig, w2v_path: Path | None):
    """Shared front half: load, clean, embed, provider."""
    reviews = corpus.load_reviews(cfg.dataset_path, skip_invalid=True)
    stopwords = _stopword_list(cfg)
    tokenized_list = preprocess.preprocess_corpus(reviews, stopwords)
    tokenized = {t.review_id: t for t in tokenized_list}
    matrix, vocab = _train_or_load_w2v(cfg, tokenized_list, w2v_path)
    if cfg.context_mode == "store":
        store = context.load_store(cfg.context_store, expected_dim=matrix.dim)
        provider = context.StoreProvider(
            store, reviews, expected_digest=context.corpus_digest(cfg.dataset_path)
        )
    else:
        provider = context.FallbackProvider(
            reviews, matrix, vocab, stopwords, tokenized=tokenized
        )
    return reviews, stopwords, tokenized, matrix, vocab, provider


def cmd_train(args, cfg: PipelineConfig) -> int:
    cfg.validate(need_dataset=True)
    stage = "load"
    try:
        stage = "preprocess+embed"
        w2v_path = Path(args.w2v) if args.w2v else None
        reviews, _, tokenized, matrix, vocab, provider = _prepare_pipeline(cfg, w2v_path)
        stage = "features"
        split = corpus.split_train_validation(
            reviews, cfg.model.val_fraction, cfg.seed
        )
        features = pipeline.build_features(
            reviews, tokenized, provider, matrix, vocab, cfg.model.max_seq_len
        )
        stage = "train"
        model = siamese.init_model(
            input_dim=matrix.dim,
            hidden_dim=cfg.model.hidden_dim,
            head_hidden=(cfg.model.head_hidden,),
            dropout_rate=cfg.model.dropout,
            seed=cfg.seed,
            shared=cfg.model.shared_weights,
        )
        model, report = siamese.train(
            model, features.samples, split, cfg.model.train_config(cfg.seed)
        )
        stage = "write"
        out = cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        if w2v_path is None:
            word2vec.save_embeddings(out / "embeddings.w2v", matrix)
        siamese.save_model(model, out / "model.siam")
        _write_json(out / "report.json", report.to_dict())
        plots.plot_training_curves(report, out / "training_curves.png")
        logger.info(
            "training done: best epoch %d (val acc %.3f), artifacts in %s",
            report.best_epoch,
            report.epochs[report.best_epoch - 1].val_acc,
            out,
        )
        return EXIT_OK
    except (siamese.ConfigurationError, ConfigError):
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc


def _fuzzy_metrics(realness_scores, labels, sets, threshold):
    decisions, histogram = fuzzy.classify_batch(realness_scores, sets, threshold)
    preds = np.array([d.label.target for d in decisions])
    labels = np.asarray(labels)
    tp = int(np.sum((preds == 1) & (labels == 1)))
    fp = int(np.sum((preds == 1) & (labels == 0)))
    fn = int(np.sum((preds == 0) & (labels == 1)))
    tn = int(np.sum((preds == 0) & (labels == 0)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    # "confident" means the outer half of the confidence range the sets can
    # actually reach (centroid defuzzification never touches 0 or 1)
    reach = max(
        fuzzy.decide(fuzzy.defuzzify(s, sets), threshold)[1] for s in (0.0, 1.0)
    )
    confidence_cut = 0.5 * reach
    metrics = {
        "accuracy": (tp + tn) / len(labels),
        "precision": precision,
        "recall": recall,
        "f1": 2 * precision * recall / (precision + recall) if precision + recall else 0.0,
        "confusion": {"tp": tp, "fp": fp, "fn": fn, "tn": tn},
        "correct_count": int(tp + tn),
        "confident_count": int(sum(d.confidence >= confidence_cut for d in decisions)),
        "confidence_cut": confidence_cut,
        "threshold": threshold,
    }
    return decisions, histogram, metrics


def cmd_evaluate(args, cfg: PipelineConfig) -> int:
    cfg.validate(need_dataset=True)
    checkpoint = Path(args.checkpoint)
    if not checkpoint.exists():
        raise ConfigError(f"checkpoint not found: {checkpoint}")
    w2v_path = Path(args.w2v) if args.w2v else cfg.output_dir / "embeddings.w2v"
    if not w2v_path.exists():
        raise ConfigError(f"embeddings not found: {w2v_path}")
    model = siamese.load_model(checkpoint)
    reviews, _, tokenized, matrix, vocab, provider = _prepare_pipeline(cfg, w2v_path)
    if model.input_dim != matrix.dim:
        raise ConfigError(
            f"checkpoint input dim {model.input_dim} does not match embeddings dim {matrix.dim}"
        )
    split = corpus.split_train_validation(reviews, cfg.model.val_fraction, cfg.seed)
    features = pipeline.build_features(
        reviews, tokenized, provider, matrix, vocab, cfg.model.max_seq_len
    )
    subset = reviews if args.full_corpus else split.validation
    samples = [features.samples[r.id] for r in subset]
    labels = [s.label for s in samples]
    sigmoid_metrics = siamese.evaluate(model, samples)
    scores = siamese.scores_for(model, samples)
    sets, threshold = _fuzzy_setup(cfg)
    realness_scores = [pipeline.realness(s) for s in scores]
    decisions, histogram, fuzzy_block = _fuzzy_metrics(realness_scores, labels, sets, threshold)

    out = cfg.output_dir
    payload = {
        "n": len(samples),
        "subset": "full" if args.full_corpus else "validation",
        "sigmoid": sigmoid_metrics.to_dict(),
        "fuzzy": fuzzy_block,
    }
    _write_json(out / "metrics.json", payload)
    with (out / "decisions.jsonl").open("w", encoding="utf-8") as fh:
        for d in decisions:
            fh.write(json.dumps(d.to_dict(), sort_keys=True) + "\n")
    _write_json(out / "histogram.json", histogram)
    plots.plot_crisp_histogram(histogram, out / "crisp_histogram.png")
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_classify(args, cfg: PipelineConfig) -> int:
    cfg.validate(need_dataset=False)
    checkpoint = Path(args.checkpoint)
    if not checkpoint.exists():
        raise ConfigError(f"checkpoint not found: {checkpoint}")
    w2v_path = Path(args.w2v) if args.w2v else cfg.output_dir / "embeddings.w2v"
    if not w2v_path.exists():
        raise ConfigError(f"embeddings not found: {w2v_path}")
    model = siamese.load_model(checkpoint)
    matrix, vocab = word2vec.load_embeddings(w2v_path)
    stopwords = _stopword_list(cfg)
    tokens, score = pipeline.classify_text(
        args.text, stopwords, matrix, vocab, model, cfg.model.max_seq_len
    )
    if not tokens:
        logger.warning("text is empty after cleaning; scoring the zero-vector path")
    sets, threshold = _fuzzy_setup(cfg)
    decision = fuzzy.classify_score(pipeline.realness(score), sets, threshold)
    print(
        json.dumps(
            {
                "tokens": list(tokens),
                "sigmoid_score": score,
                "fuzzy": decision.to_dict(),
                "label": decision.label.value,
            },
            sort_keys=True,
        )
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reviewjudge",
        description="Detect computer-generated product reviews.",
    )
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--seed", type=int, help="global seed (overrides config and env)")
    parser.add_argument("--workers", type=int, help="worker threads for word2vec")
    parser.add_argument("--output-dir", help="directory for reports and artifacts")
    parser.add_argument("--stopwords", help="stopword file (one word per line)")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="dataset statistics table + JSON")
    p.add_argument("--dataset", help="review CSV path")
    p.add_argument("--length-unit", choices=["chars", "tokens"])
    p.add_argument("--json-only", action="store_true", help="suppress the text table")
    p.add_argument("--skip-invalid", action="store_true", help="drop malformed rows with a warning")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("preprocess", help="token frequency report")
    p.add_argument("--dataset")
    p.add_argument("--stage", choices=["raw", "cleaned"], default="raw")
    p.add_argument("--top", type=int, default=50)
    p.add_argument("--json-only", action="store_true")
    p.add_argument("--tokens-out", help="also write per-review cleaned tokens (JSONL)")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train-w2v", help="train skip-gram embeddings only")
    p.add_argument("--dataset")
    p.add_argument("--fixed-window", action="store_true")
    p.add_argument("--text-out", action="store_true", help="also write the text format")
    p.set_defaults(func=cmd_train_w2v)

    p = sub.add_parser("train", help="full pipeline training")
    p.add_argument("--dataset")
    p.add_argument("--w2v", help="reuse saved embeddings instead of training")
    p.add_argument("--store", help="CTX1 contextual store (switches context mode)")
    p.add_argument("--fixed-window", action="store_true")
    p.add_argument("--shared-weights", action="store_true")
    p.add_argument("--fuzzy-config")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="sigmoid + fuzzy metrics for a checkpoint")
    p.add_argument("--dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--w2v")
    p.add_argument("--store")
    p.add_argument("--fuzzy-config")
    p.add_argument("--full-corpus", action="store_true", help="evaluate on all reviews, not the validation split")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("classify", help="classify one review text")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--w2v")
    p.add_argument("--text", required=True)
    p.add_argument("--fuzzy-config")
    p.set_defaults(func=cmd_classify)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(args, cfg)
        return args.func(args, cfg)
    except (ConfigError, corpus.SchemaError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        logger.error("file not found: %s", exc)
        return EXIT_USAGE
    except StageError as exc:
        logger.error("%s", exc)
        return EXIT_RUNTIME
    except Exception as exc:  # runtime failures keep the contract: exit 1
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
