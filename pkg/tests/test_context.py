import logging

import numpy as np
import pytest

from reviewjudge.context import (
    EmbeddingStore,
    FallbackProvider,
    ProviderError,
    StoreCorruptionError,
    StoreDimensionError,
    StoreFormatError,
    StoreProvider,
    corpus_digest,
    fallback_embed,
    load_store,
    save_store,
)
from reviewjudge.preprocess import TokenizedReview, builtin_stopwords
from reviewjudge.word2vec import EmbeddingMatrix, Vocabulary

from conftest import make_reviews


def random_store(n=5, dim=6, seed=0, digest=b"\x11" * 16):
    rng = np.random.default_rng(seed)
    vectors = {i * 3: rng.normal(size=dim) for i in range(n)}
    return EmbeddingStore(dim=dim, vectors=vectors, source_digest=digest)


def toy_matrix_vocab():
    # 3-d vectors picked for hand computation
    tokens = ["alpha", "beta", "gamma"]
    vectors = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [3.0, 0.0, 4.0]])
    vocab = Vocabulary(
        token_to_index={t: i for i, t in enumerate(tokens)},
        counts={t: 1 for t in tokens},
        min_count=1,
    )
    return EmbeddingMatrix(tokens=tokens, input_vectors=vectors), vocab


class TestStoreFormat:
    def test_round_trip_bit_identical(self, tmp_path):
        store = random_store()
        p1, p2 = tmp_path / "a.ctx", tmp_path / "b.ctx"
        save_store(store, p1)
        loaded = load_store(p1)
        assert loaded.dim == store.dim
        assert loaded.source_digest == store.source_digest
        assert set(loaded.vectors) == set(store.vectors)
        for rid in store.vectors:
            np.testing.assert_array_equal(
                loaded.vectors[rid], store.vectors[rid].astype(np.float32)
            )
        save_store(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_store_is_header_plus_digest(self, tmp_path):
        store = EmbeddingStore(dim=384, vectors={})
        path = tmp_path / "empty.ctx"
        save_store(store, path)
        # 16-byte fixed header (magic, dim, count) + 16-byte corpus digest
        assert path.stat().st_size == 32
        loaded = load_store(path)
        assert len(loaded) == 0 and loaded.dim == 384

    def test_single_vector_size(self, tmp_path):
        store = EmbeddingStore(dim=4, vectors={7: np.ones(4)})
        path = tmp_path / "one.ctx"
        save_store(store, path)
        assert path.stat().st_size == 32 + 8 + 4 * 4

    def test_dimension_mismatch_names_both(self, tmp_path):
        store = EmbeddingStore(dim=128, vectors={0: np.zeros(128)})
        path = tmp_path / "small.ctx"
        save_store(store, path)
        with pytest.raises(StoreDimensionError, match="128.*384"):
            load_store(path, expected_dim=384)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.ctx"
        path.write_bytes(b"NOPE" + b"\x00" * 28)
        with pytest.raises(StoreFormatError, match="magic"):
            load_store(path)

    def test_truncated_record_reports_offset(self, tmp_path):
        store = EmbeddingStore(dim=4, vectors={0: np.ones(4), 1: np.ones(4)})
        path = tmp_path / "trunc.ctx"
        save_store(store, path)
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(StoreCorruptionError, match="offset"):
            load_store(path)

    def test_invalid_vectors_rejected_at_construction(self):
        with pytest.raises(ValueError, match="shape"):
            EmbeddingStore(dim=3, vectors={0: np.zeros(2)})
        with pytest.raises(ValueError, match="finite"):
            EmbeddingStore(dim=2, vectors={0: np.array([1.0, np.nan])})

    def test_digest_helper(self, tmp_path):
        path = tmp_path / "f.bin"
        path.write_bytes(b"hello world")
        digest = corpus_digest(path)
        assert len(digest) == 16
        assert digest == corpus_digest(path)


class TestFallbackEmbed:
    def test_single_token_is_normalized_vector(self):
        matrix, vocab = toy_matrix_vocab()
        out = fallback_embed(TokenizedReview(0, ("gamma",)), matrix, vocab)
        np.testing.assert_allclose(out, np.array([0.6, 0.0, 0.8]))

    def test_empty_review_gives_zero_vector(self):
        matrix, vocab = toy_matrix_vocab()
        out = fallback_embed(TokenizedReview(0, ()), matrix, vocab)
        np.testing.assert_array_equal(out, np.zeros(3))

    def test_all_oov_gives_zero_vector(self):
        matrix, vocab = toy_matrix_vocab()
        out = fallback_embed(TokenizedReview(0, ("nope", "nada")), matrix, vocab)
        np.testing.assert_array_equal(out, np.zeros(3))

    def test_two_token_hand_computation(self):
        # mean of alpha=[1,0,0] and beta=[0,2,0] is [0.5,1,0];
        # norm = sqrt(1.25), so the result is [0.5,1,0]/sqrt(1.25)
        matrix, vocab = toy_matrix_vocab()
        out = fallback_embed(TokenizedReview(0, ("alpha", "beta")), matrix, vocab)
        expected = np.array([0.5, 1.0, 0.0]) / np.sqrt(1.25)
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_nonzero_outputs_are_unit_norm(self):
        matrix, vocab = toy_matrix_vocab()
        rng = np.random.default_rng(0)
        names = list(vocab.token_to_index)
        for _ in range(200):
            tokens = tuple(
                names[int(i)] for i in rng.integers(0, len(names), rng.integers(1, 6))
            )
            out = fallback_embed(TokenizedReview(0, tokens), matrix, vocab)
            assert abs(np.linalg.norm(out) - 1.0) < 1e-6


class TestProviders:
    def test_store_provider_total_and_looks_up(self):
        reviews = make_reviews(6)
        store = EmbeddingStore(
            dim=3, vectors={r.id: np.full(3, float(r.id)) for r in reviews}
        )
        provider = StoreProvider(store, reviews)
        for r in reviews:
            np.testing.assert_array_equal(provider.get(r), np.full(3, float(r.id)))
            np.testing.assert_array_equal(provider.get(r.id), provider.get(r))

    def test_store_provider_rejects_missing_ids(self):
        reviews = make_reviews(4)
        store = EmbeddingStore(dim=3, vectors={0: np.zeros(3)})
        with pytest.raises(ProviderError, match="missing"):
            StoreProvider(store, reviews)

    def test_digest_mismatch_warns_but_continues(self, caplog):
        reviews = make_reviews(2)
        store = EmbeddingStore(
            dim=3,
            vectors={r.id: np.zeros(3) for r in reviews},
            source_digest=b"\x01" * 16,
        )
        with caplog.at_level(logging.WARNING):
            StoreProvider(store, reviews, expected_digest=b"\x02" * 16)
        assert any("digest" in rec.message for rec in caplog.records)

    def test_fallback_provider_total_over_corpus(self):
        matrix, vocab = toy_matrix_vocab()
        reviews = make_reviews(8)
        provider = FallbackProvider(reviews, matrix, vocab, builtin_stopwords())
        for r in reviews:
            vec = provider.get(r)
            assert vec.shape == (3,)
            assert np.isfinite(vec).all()
