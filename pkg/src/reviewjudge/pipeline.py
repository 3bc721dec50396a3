"""Feature assembly shared by the train, evaluate, and classify commands.

The classifier scores fake-ness (CG is class 1).  The fuzzy stage operates
on the realness axis (0 fake, 1 real), so the sigmoid score is reflected
with ``realness`` before fuzzification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .context import FallbackProvider, StoreProvider, fallback_embed
from .corpus import Label, Review
from .preprocess import StopwordList, TokenizedReview, preprocess_review
from .siamese import Sample, SiameseModel, forward
from .word2vec import EmbeddingMatrix, Vocabulary, embed_tokens


@dataclass(frozen=True)
class FeatureSet:
    samples: dict[int, Sample]
    max_seq_len: int


class TokenRows:
    """Lazy token-vector sequence: row indices into the shared embedding
    matrix, materialized per use.  Keeps corpus-scale feature sets at a few
    bytes per token instead of a dense copy per review."""

    __slots__ = ("matrix", "rows")

    def __init__(self, matrix: np.ndarray, rows: np.ndarray):
        self.matrix = matrix
        self.rows = rows

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.matrix[self.rows])


def realness(fake_score: float) -> float:
    """Map the sigmoid's fake probability onto the fuzzy input axis."""
    return 1.0 - fake_score


def sample_for_review(
    review: Review,
    tokenized: TokenizedReview,
    provider: StoreProvider | FallbackProvider,
    matrix: EmbeddingMatrix,
    vocab: Vocabulary,
    max_seq_len: int,
) -> Sample:
    ctx = np.asarray(provider.get(review), dtype=np.float64)
    rows = np.array(
        [vocab.token_to_index[t] for t in tokenized.tokens if t in vocab][:max_seq_len],
        dtype=np.int64,
    )
    return Sample(
        ctx_seq=ctx.reshape(1, -1),
        tok_seq=TokenRows(matrix.input_vectors, rows),
        label=review.label.target,
    )


def build_features(
    reviews: list[Review],
    tokenized: dict[int, TokenizedReview],
    provider: StoreProvider | FallbackProvider,
    matrix: EmbeddingMatrix,
    vocab: Vocabulary,
    max_seq_len: int = 200,
) -> FeatureSet:
    samples = {
        r.id: sample_for_review(r, tokenized[r.id], provider, matrix, vocab, max_seq_len)
        for r in reviews
    }
    return FeatureSet(samples=samples, max_seq_len=max_seq_len)


def classify_text(
    text: str,
    stopwords: StopwordList,
    matrix: EmbeddingMatrix,
    vocab: Vocabulary,
    model: SiameseModel,
    max_seq_len: int = 200,
) -> tuple[tuple[str, ...], float]:
    """Tokens and fake score for a single free-form text.

    Uses the fallback contextual path (a lone text has no store entry); an
    all-stopword text flows through the documented zero-vector path.
    """
    review = Review(id=0, category="", rating=0.0, text=text or " ", label=Label.OG)
    tokenized = preprocess_review(review, stopwords)
    ctx = fallback_embed(tokenized, matrix, vocab)
    tok_seq = embed_tokens(tokenized, matrix, vocab)[:max_seq_len]
    score, _ = forward(model, ctx.reshape(1, -1), tok_seq, mode="infer")
    return tokenized.tokens, score
