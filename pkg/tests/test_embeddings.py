"""Skip-gram and subword embedding training, lookup and persistence."""

import numpy as np
import pytest

from flamewatch.embeddings import (
    EmbedConfig,
    EmbeddingFormatError,
    SubwordConfig,
    build_vocab,
    char_ngrams,
    compose_word,
    fnv1a_hash,
    load_embeddings,
    lookup,
    negative_sampling_distribution,
    ngram_ids,
    save_embeddings,
    train_fasttext,
    train_word2vec,
)

SMALL_SUB = SubwordConfig(min_n=3, max_n=4, buckets=2 ** 12)


def _cos(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def toy_corpus(seed=0, sentences=200, length=8):
    rng = np.random.default_rng(seed)
    vocab = [f"word{i}" for i in range(20)] + ["happy"]
    return [
        list(rng.choice(vocab, size=length)) for _ in range(sentences)
    ]


class TestVocab:
    def test_min_count_filters(self):
        vocab = build_vocab([["a", "a", "b"]], min_count=2)
        assert vocab.id_to_token == ["a"]

    def test_ordering_count_desc_then_token(self):
        vocab = build_vocab([["b", "b", "a", "a", "c", "c", "c"]], min_count=1)
        assert vocab.id_to_token == ["c", "a", "b"]

    def test_deterministic(self):
        sents = toy_corpus()
        assert build_vocab(sents).id_to_token == build_vocab(sents).id_to_token

    def test_empty_corpus_raises(self):
        with pytest.raises(ValueError):
            build_vocab([[]])

    def test_unreachable_min_count_raises(self):
        with pytest.raises(ValueError):
            build_vocab([["a", "b"]], min_count=5)


class TestNoiseDistribution:
    def test_proportional_to_count_power(self):
        vocab = build_vocab([["a"] * 16 + ["b"] * 4 + ["c"] * 2], min_count=1)
        dist = negative_sampling_distribution(vocab)
        weights = vocab.counts.astype(float) ** 0.75
        assert dist == pytest.approx(weights / weights.sum(), abs=1e-15)

    def test_sums_to_one(self):
        vocab = build_vocab(toy_corpus(), min_count=1)
        dist = negative_sampling_distribution(vocab)
        assert abs(dist.sum() - 1.0) < 1e-12
        assert (dist > 0).all()


class TestSubwordPieces:
    def test_char_ngrams_with_boundaries(self):
        assert char_ngrams("ab", 3, 4) == ["<ab", "ab>", "<ab>"]

    def test_fnv1a_reference_values(self):
        # published 32-bit FNV-1a test vectors
        assert fnv1a_hash(b"") == 0x811C9DC5
        assert fnv1a_hash(b"a") == 0xE40C292C
        assert fnv1a_hash(b"foobar") == 0xBF9CF968

    def test_ngram_ids_in_bucket_range(self):
        ids = ngram_ids("hello", SMALL_SUB)
        assert ids and all(0 <= i < SMALL_SUB.buckets for i in ids)

    def test_min_n_above_max_n_rejected(self):
        with pytest.raises(ValueError):
            SubwordConfig(min_n=5, max_n=3)


class TestTraining:
    def test_loss_decreases_word2vec(self):
        config = EmbedConfig(dim=16, window=3, negatives=3, epochs=3,
                             min_count=1, seed=4)
        matrix = train_word2vec(toy_corpus(), config)
        assert matrix.epoch_losses[-1] < matrix.epoch_losses[0]

    def test_cooccurring_pair_more_similar_than_random(self):
        # "sun" and "moon" co-occur in every sentence and draw their
        # immediate neighbours from the same small context pool, so their
        # vectors should end up close; cosines are taken after removing the
        # corpus-wide mean, which all vectors drift along during training
        rng = np.random.default_rng(9)
        ctx = [f"c{i}" for i in range(6)]
        filler = [f"f{i}" for i in range(30)]
        sents = []
        for _ in range(300):
            sents.append(
                [str(rng.choice(ctx)), "sun", str(rng.choice(ctx))]
                + list(rng.choice(filler, size=3))
                + [str(rng.choice(ctx)), "moon", str(rng.choice(ctx))]
            )
        config = EmbedConfig(dim=24, window=1, negatives=4, epochs=5,
                             min_count=1, seed=1)
        matrix = train_word2vec(sents, config)
        centered = matrix.vectors - matrix.vectors.mean(axis=0)
        ids = matrix.vocab.token_to_id
        pair = _cos(centered[ids["sun"]], centered[ids["moon"]])
        sims = []
        for _ in range(300):
            a, b = rng.choice(len(ids), size=2, replace=False)
            sims.append(_cos(centered[a], centered[b]))
        assert pair > np.percentile(sims, 95)

    def test_dim_one_smoke(self):
        config = EmbedConfig(dim=1, window=2, negatives=2, epochs=1,
                             min_count=1, seed=0)
        matrix = train_word2vec(toy_corpus(sentences=20), config)
        assert matrix.vectors.shape[1] == 1

    def test_deterministic_given_seed(self):
        config = EmbedConfig(dim=8, window=2, negatives=2, epochs=2,
                             min_count=1, seed=7)
        a = train_word2vec(toy_corpus(sentences=50), config)
        b = train_word2vec(toy_corpus(sentences=50), config)
        assert (a.vectors == b.vectors).all()

    def test_corpus_below_min_count_raises(self):
        with pytest.raises(ValueError):
            train_word2vec([["a", "b", "c"]], EmbedConfig(dim=4, min_count=2))


@pytest.fixture(scope="module")
def matrix():
    config = EmbedConfig(dim=16, window=3, negatives=3, epochs=3,
                         min_count=1, seed=2, subword=SMALL_SUB)
    return train_fasttext(toy_corpus(sentences=150), config)


class TestFasttext:
    def test_stored_vectors_are_composed(self, matrix):
        # every stored row must equal the mean of the word's raw vector and
        # its n-gram bucket vectors, recomputed independently
        sub = matrix.subword
        for wid, word in enumerate(matrix.vocab.id_to_token):
            grams = ngram_ids(word, sub)
            stack = np.vstack(
                [sub.word_raw_vectors[wid]] + [sub.bucket_vectors[g] for g in grams]
            )
            assert matrix.vectors[wid] == pytest.approx(stack.mean(axis=0))

    def test_oov_composition_nonzero(self, matrix):
        vec = lookup(matrix, "zzzqqq")
        assert np.linalg.norm(vec) > 0

    def test_oov_variant_similar_to_base(self, matrix):
        # shared character n-grams should pull the misspelling towards its
        # base word; compare against random pairs with the common mean removed
        rng = np.random.default_rng(3)
        mean = matrix.vectors.mean(axis=0)
        variant = lookup(matrix, "happyy") - mean
        base = lookup(matrix, "happy") - mean
        centered = matrix.vectors - mean
        sims = []
        n = len(matrix.vocab)
        for _ in range(200):
            a, b = rng.choice(n, size=2, replace=False)
            sims.append(_cos(centered[a], centered[b]))
        assert _cos(variant, base) > np.median(sims)

    def test_compose_word_requires_subword(self):
        config = EmbedConfig(dim=4, window=2, negatives=2, epochs=1, min_count=1)
        w2v = train_word2vec(toy_corpus(sentences=20), config)
        with pytest.raises(ValueError):
            compose_word(w2v, "happy")

    def test_word2vec_oov_is_zero_vector(self):
        config = EmbedConfig(dim=4, window=2, negatives=2, epochs=1, min_count=1)
        w2v = train_word2vec(toy_corpus(sentences=20), config)
        assert (lookup(w2v, "zzzqqq") == 0).all()


class TestPersistence:
    def test_word2vec_round_trip(self, tmp_path):
        config = EmbedConfig(dim=8, window=2, negatives=2, epochs=1,
                             min_count=1, seed=0)
        matrix = train_word2vec(toy_corpus(sentences=30), config)
        path = tmp_path / "vectors.txt"
        save_embeddings(matrix, path)
        back = load_embeddings(path)
        assert back.vocab.id_to_token == matrix.vocab.id_to_token
        assert back.vectors == pytest.approx(matrix.vectors, abs=1e-6)
        assert back.subword is None

    def test_fasttext_round_trip_with_sidecar(self, tmp_path):
        config = EmbedConfig(dim=8, window=2, negatives=2, epochs=1,
                             min_count=1, seed=0, subword=SMALL_SUB)
        matrix = train_fasttext(toy_corpus(sentences=30), config)
        path = tmp_path / "vectors.txt"
        save_embeddings(matrix, path)
        back = load_embeddings(path)
        assert back.subword is not None
        assert back.subword.buckets == SMALL_SUB.buckets
        # OOV composition survives the round trip (float32 sidecar precision)
        assert lookup(back, "happyy") == pytest.approx(
            lookup(matrix, "happyy"), abs=1e-5
        )

    def test_bad_header_line_numbered(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("garbage header line\n")
        with pytest.raises(EmbeddingFormatError, match="line 1"):
            load_embeddings(path)

    def test_wrong_component_count_line_numbered(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("1 3\nword 0.1 0.2\n")
        with pytest.raises(EmbeddingFormatError, match="line 2"):
            load_embeddings(path)

    def test_truncated_body_reported(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("2 2\nword 0.1 0.2\n")
        with pytest.raises(EmbeddingFormatError, match="file ended"):
            load_embeddings(path)

    def test_trailing_data_reported(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("1 2\nword 0.1 0.2\nextra stuff\n")
        with pytest.raises(EmbeddingFormatError, match="trailing"):
            load_embeddings(path)

    def test_bad_sidecar_magic(self, tmp_path):
        path = tmp_path / "vectors.txt"
        path.write_text("1 2\nword 0.1 0.2\n")
        (tmp_path / "vectors.txt.subword").write_bytes(b"XXXX" + b"\0" * 24)
        with pytest.raises(EmbeddingFormatError, match="magic"):
            load_embeddings(path)
