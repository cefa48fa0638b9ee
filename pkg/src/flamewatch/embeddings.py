"""Skip-gram word embeddings with negative sampling, plus a subword variant.

Both trainers share the same objective; the subword variant represents a
word as the mean of its own vector and hashed character n-gram vectors,
which also gives out-of-vocabulary words a usable vector. Training is
sequential SGD with a fixed seed, so runs are reproducible.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

SIDECAR_MAGIC = b"FWSB"
SIDECAR_VERSION = 1


@dataclass
class SubwordConfig:
    min_n: int = 3
    max_n: int = 6
    buckets: int = 2 ** 21

    def __post_init__(self):
        if self.min_n > self.max_n:
            raise ValueError(f"min_n {self.min_n} > max_n {self.max_n}")
        if self.buckets < 1:
            raise ValueError("buckets must be positive")


@dataclass
class EmbedConfig:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    min_count: int = 2
    seed: int = 1
    subword: SubwordConfig | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")


@dataclass
class Vocabulary:
    token_to_id: dict[str, int]
    id_to_token: list[str]
    counts: np.ndarray
    min_count: int

    def __len__(self) -> int:
        return len(self.id_to_token)


@dataclass
class SubwordTable:
    min_n: int
    max_n: int
    buckets: int
    bucket_vectors: np.ndarray  # buckets x dim
    word_raw_vectors: np.ndarray  # |V| x dim, pre-composition input vectors


@dataclass
class EmbeddingMatrix:
    dim: int
    vocab: Vocabulary
    vectors: np.ndarray  # |V| x dim; for the subword variant these are composed
    subword: SubwordTable | None = None
    epoch_losses: list[float] = field(default_factory=list)


def build_vocab(sentences: list[list[str]], min_count: int = 2) -> Vocabulary:
    """Count tokens and keep those at or above min_count, ids by (count desc, token asc)."""
    counts: dict[str, int] = {}
    for sent in sentences:
        for tok in sent:
            counts[tok] = counts.get(tok, 0) + 1
    if not counts:
        raise ValueError("empty corpus")
    kept = sorted(
        ((tok, c) for tok, c in counts.items() if c >= min_count),
        key=lambda tc: (-tc[1], tc[0]),
    )
    if not kept:
        raise ValueError(f"no token reaches min_count={min_count}")
    id_to_token = [tok for tok, _ in kept]
    return Vocabulary(
        token_to_id={tok: i for i, tok in enumerate(id_to_token)},
        id_to_token=id_to_token,
        counts=np.array([c for _, c in kept], dtype=np.int64),
        min_count=min_count,
    )


def negative_sampling_distribution(vocab: Vocabulary) -> np.ndarray:
    """Unigram distribution raised to the 3/4 power, normalized."""
    weighted = vocab.counts.astype(np.float64) ** 0.75
    return weighted / weighted.sum()


def fnv1a_hash(data: bytes) -> int:
    h = 2166136261
    for byte in data:
        h ^= byte
        h = (h * 16777619) & 0xFFFFFFFF
    return h


def char_ngrams(word: str, min_n: int, max_n: int) -> list[str]:
    padded = f"<{word}>"
    grams = []
    for n in range(min_n, max_n + 1):
        for i in range(len(padded) - n + 1):
            grams.append(padded[i:i + n])
    return grams


def ngram_ids(word: str, sub: SubwordConfig | SubwordTable) -> list[int]:
    return [
        fnv1a_hash(g.encode("utf-8")) % sub.buckets
        for g in char_ngrams(word, sub.min_n, sub.max_n)
    ]


def _sentence_ids(sentences: list[list[str]], vocab: Vocabulary) -> list[list[int]]:
    return [
        [vocab.token_to_id[t] for t in sent if t in vocab.token_to_id]
        for sent in sentences
    ]


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    # numerically stable log(sigmoid(x))
    return np.where(x >= 0, -np.log1p(np.exp(-x)), x - np.log1p(np.exp(x)))


def _train(
    sentences: list[list[str]],
    config: EmbedConfig,
) -> EmbeddingMatrix:
    vocab = build_vocab(sentences, config.min_count)
    rng = np.random.default_rng(config.seed)
    dim = config.dim
    vocab_size = len(vocab)

    bound = 0.5 / dim
    w_in = rng.uniform(-bound, bound, size=(vocab_size, dim))
    w_out = np.zeros((vocab_size, dim))
    sub = config.subword
    if sub is not None:
        buckets = rng.uniform(-bound, bound, size=(sub.buckets, dim))
        grams = [ngram_ids(w, sub) for w in vocab.id_to_token]
    else:
        buckets = None
        grams = None

    noise = negative_sampling_distribution(vocab)
    noise_cdf = np.cumsum(noise)
    noise_cdf[-1] = 1.0

    ids = _sentence_ids(sentences, vocab)
    total_centers = sum(len(s) for s in ids) * config.epochs
    if total_centers == 0:
        raise ValueError("corpus too small: no training pairs")
    processed = 0
    pair_seen = False
    losses = []

    for _epoch in range(config.epochs):
        epoch_loss = 0.0
        epoch_pairs = 0
        for sent in ids:
            for pos, center in enumerate(sent):
                lr = config.initial_lr * max(
                    1e-4, 1.0 - processed / (total_centers + 1)
                )
                processed += 1
                b = int(rng.integers(1, config.window + 1))
                lo = max(0, pos - b)
                hi = min(len(sent), pos + b + 1)
                for ctx_pos in range(lo, hi):
                    if ctx_pos == pos:
                        continue
                    if sub is None:
                        v = w_in[center].copy()
                    else:
                        v = np.vstack(
                            [w_in[center][None, :], buckets[grams[center]]]
                        ).mean(axis=0)
                    target = sent[ctx_pos]
                    negs = np.searchsorted(
                        noise_cdf, rng.random(config.negatives)
                    )
                    targets = np.concatenate(([target], negs))
                    labels = np.zeros(len(targets))
                    labels[0] = 1.0
                    u = w_out[targets]
                    scores = u @ v
                    p = 1.0 / (1.0 + np.exp(-np.clip(scores, -30, 30)))
                    epoch_loss += float(
                        -_log_sigmoid(scores[0])
                        - _log_sigmoid(-scores[1:]).sum()
                    )
                    epoch_pairs += 1
                    pair_seen = True
                    g = (p - labels) * lr
                    grad_v = g @ u
                    w_out[targets] -= np.outer(g, v)
                    if sub is None:
                        w_in[center] -= grad_v
                    else:
                        share = grad_v / (1 + len(grams[center]))
                        w_in[center] -= share
                        np.add.at(buckets, grams[center], -share)
        if epoch_pairs:
            losses.append(epoch_loss / epoch_pairs)
        else:
            losses.append(float("nan"))

    if not pair_seen:
        raise ValueError("corpus too small: no (center, context) pair")

    if sub is None:
        return EmbeddingMatrix(dim=dim, vocab=vocab, vectors=w_in, epoch_losses=losses)
    composed = np.vstack([
        np.vstack([w_in[i][None, :], buckets[grams[i]]]).mean(axis=0)
        for i in range(vocab_size)
    ])
    table = SubwordTable(
        min_n=sub.min_n,
        max_n=sub.max_n,
        buckets=sub.buckets,
        bucket_vectors=buckets,
        word_raw_vectors=w_in,
    )
    return EmbeddingMatrix(
        dim=dim, vocab=vocab, vectors=composed, subword=table, epoch_losses=losses
    )


def train_word2vec(sentences: list[list[str]], config: EmbedConfig) -> EmbeddingMatrix:
    if config.subword is not None:
        config = EmbedConfig(**{**config.__dict__, "subword": None})
    return _train(sentences, config)


def train_fasttext(sentences: list[list[str]], config: EmbedConfig) -> EmbeddingMatrix:
    if config.subword is None:
        config = EmbedConfig(**{**config.__dict__, "subword": SubwordConfig()})
    return _train(sentences, config)


def compose_word(matrix: EmbeddingMatrix, word: str) -> np.ndarray:
    """Mean of the word's raw vector (if in vocab) and its n-gram bucket vectors."""
    sub = matrix.subword
    if sub is None:
        raise ValueError("matrix has no subword table")
    rows = [sub.bucket_vectors[i] for i in ngram_ids(word, sub)]
    wid = matrix.vocab.token_to_id.get(word)
    if wid is not None:
        rows.insert(0, sub.word_raw_vectors[wid])
    if not rows:
        return np.zeros(matrix.dim)
    return np.vstack(rows).mean(axis=0)


def lookup(matrix: EmbeddingMatrix, word: str) -> np.ndarray:
    """In-vocab -> stored row; OOV -> subword composition or a zero vector."""
    wid = matrix.vocab.token_to_id.get(word)
    if wid is not None:
        return matrix.vectors[wid]
    if matrix.subword is not None:
        return compose_word(matrix, word)
    return np.zeros(matrix.dim)


def save_embeddings(matrix: EmbeddingMatrix, path) -> None:
    """Text format "word v1 ... vdim" with a "count dim" header; subword
    constituents go to a versioned binary sidecar at path + ".subword"."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(matrix.vocab)} {matrix.dim}\n")
        for i, word in enumerate(matrix.vocab.id_to_token):
            vals = " ".join(f"{v:.8e}" for v in matrix.vectors[i])
            fh.write(f"{word} {vals}\n")
    sub = matrix.subword
    sidecar = str(path) + ".subword"
    if sub is None:
        if os.path.exists(sidecar):
            os.unlink(sidecar)
        return
    with open(sidecar, "wb") as fh:
        fh.write(SIDECAR_MAGIC)
        fh.write(struct.pack(
            "<5i", SIDECAR_VERSION, sub.min_n, sub.max_n, sub.buckets, matrix.dim
        ))
        fh.write(struct.pack("<i", len(matrix.vocab)))
        fh.write(sub.word_raw_vectors.astype("<f4").tobytes())
        fh.write(sub.bucket_vectors.astype("<f4").tobytes())


class EmbeddingFormatError(ValueError):
    pass


def load_embeddings(path) -> EmbeddingMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise EmbeddingFormatError("line 1: header must be 'count dim'")
        count, dim = int(header[0]), int(header[1])
        words = []
        rows = np.zeros((count, dim))
        for i in range(count):
            line = fh.readline()
            if not line:
                raise EmbeddingFormatError(
                    f"line {i + 2}: expected {count} vector lines, file ended"
                )
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise EmbeddingFormatError(
                    f"line {i + 2}: expected {dim} components, got {len(parts) - 1}"
                )
            words.append(parts[0])
            rows[i] = [float(x) for x in parts[1:]]
        if fh.readline().strip():
            raise EmbeddingFormatError(f"line {count + 2}: trailing data after body")

    vocab = Vocabulary(
        token_to_id={w: i for i, w in enumerate(words)},
        id_to_token=words,
        counts=np.zeros(len(words), dtype=np.int64),
        min_count=0,
    )
    matrix = EmbeddingMatrix(dim=dim, vocab=vocab, vectors=rows)

    sidecar = str(path) + ".subword"
    if os.path.exists(sidecar):
        with open(sidecar, "rb") as fh:
            if fh.read(4) != SIDECAR_MAGIC:
                raise EmbeddingFormatError("sidecar: bad magic bytes")
            version, min_n, max_n, buckets, sdim = struct.unpack("<5i", fh.read(20))
            if version != SIDECAR_VERSION:
                raise EmbeddingFormatError(f"sidecar: unsupported version {version}")
            if sdim != dim:
                raise EmbeddingFormatError(
                    f"sidecar: dim {sdim} does not match text file dim {dim}"
                )
            (vcount,) = struct.unpack("<i", fh.read(4))
            if vcount != count:
                raise EmbeddingFormatError(
                    f"sidecar: vocab size {vcount} does not match text file {count}"
                )
            raw = np.frombuffer(
                fh.read(vcount * dim * 4), dtype="<f4"
            ).reshape(vcount, dim).astype(np.float64)
            bvec = np.frombuffer(
                fh.read(buckets * dim * 4), dtype="<f4"
            ).reshape(buckets, dim).astype(np.float64)
        matrix.subword = SubwordTable(
            min_n=min_n, max_n=max_n, buckets=buckets,
            bucket_vectors=bvec, word_raw_vectors=raw,
        )
    return matrix
