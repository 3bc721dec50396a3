"""Per-review contextual vectors: file-backed store plus hermetic fallback.

The contextual branch consumes one 384-d vector per review.  Real vectors
come from a precomputed CTX1 store written by the offline exporter; the
fallback provider derives a stand-in from the word2vec matrix so the rest
of the pipeline never depends on a pretrained encoder being present.
"""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .corpus import Review
from .preprocess import StopwordList, TokenizedReview, preprocess_review
from .word2vec import EmbeddingMatrix, Vocabulary, embed_tokens

logger = logging.getLogger(__name__)

CTX_MAGIC = b"CTX1"
_HEADER = struct.Struct("<4sIQ")  # magic, u32 dim, u64 count
DIGEST_BYTES = 16


class StoreFormatError(Exception):
    """Bad magic or malformed header."""


class StoreDimensionError(StoreFormatError):
    """The store's vector width does not match the pipeline's."""


class StoreCorruptionError(StoreFormatError):
    """Record data ends mid-stream."""


class ProviderError(Exception):
    """A provider cannot cover the corpus it was built for."""


def corpus_digest(path: str | Path) -> bytes:
    """16-byte digest identifying the originating corpus file."""
    h = hashlib.md5()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.digest()


@dataclass
class EmbeddingStore:
    dim: int
    vectors: dict[int, np.ndarray]
    source_digest: bytes = b"\x00" * DIGEST_BYTES

    def __post_init__(self):
        if len(self.source_digest) != DIGEST_BYTES:
            raise ValueError(f"source digest must be {DIGEST_BYTES} bytes")
        for review_id, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise ValueError(
                    f"vector for review {review_id} has shape {vec.shape}, "
                    f"expected ({self.dim},)"
                )
            if not np.isfinite(vec).all():
                raise ValueError(f"non-finite vector for review {review_id}")

    def __len__(self) -> int:
        return len(self.vectors)


def save_store(store: EmbeddingStore, path: str | Path) -> None:
    """Write the CTX1 binary: header, digest, then (u64 id, f32 vector)
    records in ascending id order (that makes saves byte-reproducible)."""
    with Path(path).open("wb") as fh:
        fh.write(_HEADER.pack(CTX_MAGIC, store.dim, len(store.vectors)))
        fh.write(store.source_digest)
        for review_id in sorted(store.vectors):
            fh.write(struct.pack("<Q", review_id))
            fh.write(np.ascontiguousarray(store.vectors[review_id], dtype="<f4").tobytes())


def load_store(path: str | Path, expected_dim: int | None = None) -> EmbeddingStore:
    path = Path(path)
    with path.open("rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise StoreFormatError(f"{path}: truncated header")
        magic, dim, count = _HEADER.unpack(header)
        if magic != CTX_MAGIC:
            raise StoreFormatError(f"{path}: bad magic {magic!r}, expected {CTX_MAGIC!r}")
        if expected_dim is not None and dim != expected_dim:
            raise StoreDimensionError(
                f"{path}: store dimension {dim} does not match expected {expected_dim}"
            )
        digest = fh.read(DIGEST_BYTES)
        if len(digest) < DIGEST_BYTES:
            raise StoreFormatError(f"{path}: truncated digest")
        record = 8 + 4 * dim
        vectors: dict[int, np.ndarray] = {}
        for i in range(count):
            raw = fh.read(record)
            if len(raw) < record:
                offset = _HEADER.size + DIGEST_BYTES + i * record + len(raw)
                raise StoreCorruptionError(
                    f"{path}: truncated record {i} at byte offset {offset}"
                )
            (review_id,) = struct.unpack_from("<Q", raw)
            vectors[review_id] = np.frombuffer(raw, dtype="<f4", offset=8).astype(
                np.float64
            )
    return EmbeddingStore(dim=dim, vectors=vectors, source_digest=digest)


def fallback_embed(
    review: TokenizedReview, matrix: EmbeddingMatrix, vocab: Vocabulary
) -> np.ndarray:
    """L2-normalized mean of the review's token vectors; zero vector when
    the review is empty or entirely out of vocabulary."""
    token_vectors = embed_tokens(review, matrix, vocab)
    if token_vectors.shape[0] == 0:
        return np.zeros(matrix.dim)
    mean = token_vectors.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm == 0:
        return np.zeros(matrix.dim)
    return mean / norm


class StoreProvider:
    """Lookups against a loaded CTX1 store; total over the given corpus."""

    kind = "store"

    def __init__(self, store: EmbeddingStore, corpus: Iterable[Review],
                 expected_digest: bytes | None = None):
        self._store = store
        missing = [r.id for r in corpus if r.id not in store.vectors]
        if missing:
            raise ProviderError(
                f"store missing {len(missing)} review vectors (first: {missing[:5]})"
            )
        if expected_digest is not None and expected_digest != store.source_digest:
            logger.warning(
                "store digest %s does not match corpus digest %s; "
                "proceeding (corpus subsets are allowed)",
                store.source_digest.hex(),
                expected_digest.hex(),
            )

    @property
    def dim(self) -> int:
        return self._store.dim

    def get(self, review: Review | int) -> np.ndarray:
        review_id = review.id if isinstance(review, Review) else review
        return self._store.vectors[review_id]


class FallbackProvider:
    """Hermetic contextual vectors derived from the word2vec matrix."""

    kind = "fallback"

    def __init__(
        self,
        corpus: Iterable[Review],
        matrix: EmbeddingMatrix,
        vocab: Vocabulary,
        stopwords: StopwordList,
        tokenized: dict[int, TokenizedReview] | None = None,
    ):
        self._dim = matrix.dim
        self._vectors: dict[int, np.ndarray] = {}
        for review in corpus:
            tok = (
                tokenized[review.id]
                if tokenized is not None
                else preprocess_review(review, stopwords)
            )
            self._vectors[review.id] = fallback_embed(tok, matrix, vocab)

    @property
    def dim(self) -> int:
        return self._dim

    def get(self, review: Review | int) -> np.ndarray:
        review_id = review.id if isinstance(review, Review) else review
        return self._vectors[review_id]
