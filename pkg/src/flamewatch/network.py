"""CNN + BiLSTM sentiment classifier in plain numpy.

Layer stack: embedding lookup, three same-padded 1-D convolutions with
ReLU and max-pooling, a masked bidirectional LSTM (final forward and
backward states concatenated), two sigmoid dense layers with dropout,
and a 5-way softmax. Forward, reverse-mode gradients and the Adam update
are all hand-written; everything runs in double precision, single
threaded, and is reproducible from the seed.

Comments longer than the token budget are chunked and their probability
vectors averaged.
"""

from __future__ import annotations

import copy
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingMatrix
from .lexicon import SentimentLabel
from .metrics import ConfusionMatrix, confusion

PAD_ID = 0
OOV_ID = 1
CHECKPOINT_MAGIC = b"FWCK"
CHECKPOINT_VERSION = 1


@dataclass
class ModelConfig:
    embed_dim: int
    max_tokens: int = 30
    conv_layers: tuple = ((64, 3), (64, 3), (64, 3))  # (filters, kernel_width)
    pool: int = 2
    lstm_hidden: int = 64
    dense_sizes: tuple = (128, 64)
    dropout_lstm: float = 0.5
    dropout_dense: float = 0.5
    classes: int = 5
    seed: int = 0
    batch_size: int = 16
    learning_rate: float = 1e-4
    fine_tune_embeddings: bool = False

    def __post_init__(self):
        self.conv_layers = tuple(tuple(c) for c in self.conv_layers)
        self.dense_sizes = tuple(self.dense_sizes)
        if self.classes != 5:
            raise ValueError("model is fixed to 5 classes")
        if len(self.conv_layers) != 3:
            raise ValueError("expected exactly 3 conv layers")
        if len(self.dense_sizes) != 2:
            raise ValueError("expected exactly 2 dense layers")
        for filters, kernel in self.conv_layers:
            if not 1 <= kernel <= self.max_tokens:
                raise ValueError(
                    f"kernel width {kernel} outside [1, {self.max_tokens}]"
                )
            if filters < 1:
                raise ValueError("filters must be positive")
        for p in (self.dropout_lstm, self.dropout_dense):
            if not 0.0 <= p < 1.0:
                raise ValueError("dropout must be in [0, 1)")


@dataclass
class Batch:
    ids: np.ndarray  # (B, max_tokens) int, right-padded with PAD_ID
    lengths: np.ndarray  # (B,)
    labels: np.ndarray | None = None  # (B, 5) one-hot


@dataclass
class TrainReport:
    train_loss: list[float] = field(default_factory=list)
    train_accuracy: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = -1
    early_stopped: bool = False


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60, 60)))


class NonFiniteError(FloatingPointError):
    def __init__(self, where: str):
        super().__init__(f"non-finite values in {where}")


def _check_finite(x, where: str):
    if not np.isfinite(x).all():
        raise NonFiniteError(where)


class SentimentNet:
    """Parameter container plus forward/backward/update for the classifier."""

    def __init__(self, config: ModelConfig, embeddings: EmbeddingMatrix):
        if embeddings.dim != config.embed_dim:
            raise ValueError(
                f"embedding dim {embeddings.dim} != config.embed_dim {config.embed_dim}"
            )
        self.config = config
        self.token_to_id = {
            tok: i + 2 for i, tok in enumerate(embeddings.vocab.id_to_token)
        }
        self.id_to_token = list(embeddings.vocab.id_to_token)
        rng = np.random.default_rng(config.seed)
        p: dict[str, np.ndarray] = {}

        table = np.zeros((len(self.id_to_token) + 2, config.embed_dim))
        table[2:] = np.asarray(embeddings.vectors, dtype=np.float64)
        p["embedding"] = table  # rows 0/1 are pad and OOV, kept at zero init

        def uniform(shape, fan_in):
            bound = 1.0 / np.sqrt(fan_in)
            return rng.uniform(-bound, bound, size=shape)

        cin = config.embed_dim
        for li, (filters, kernel) in enumerate(config.conv_layers):
            p[f"conv{li}_w"] = uniform((filters, kernel, cin), kernel * cin)
            p[f"conv{li}_b"] = np.zeros(filters)
            cin = filters
        h = config.lstm_hidden
        for d in ("fwd", "bwd"):
            p[f"lstm_{d}_wx"] = uniform((cin, 4 * h), cin)
            p[f"lstm_{d}_wh"] = uniform((h, 4 * h), h)
            p[f"lstm_{d}_b"] = np.zeros(4 * h)
        d1, d2 = config.dense_sizes
        p["dense1_w"] = uniform((2 * h, d1), 2 * h)
        p["dense1_b"] = np.zeros(d1)
        p["dense2_w"] = uniform((d1, d2), d1)
        p["dense2_b"] = np.zeros(d2)
        p["out_w"] = uniform((d2, config.classes), d2)
        p["out_b"] = np.zeros(config.classes)
        self.params = p

        self.adam_m = {k: np.zeros_like(v) for k, v in p.items()}
        self.adam_v = {k: np.zeros_like(v) for k, v in p.items()}
        self.adam_t = 0

    # ----- helpers ---------------------------------------------------------

    def trainable_keys(self) -> list[str]:
        keys = [k for k in self.params if k != "embedding"]
        if self.config.fine_tune_embeddings:
            keys.append("embedding")
        return sorted(keys)

    def num_parameters(self, include_embedding: bool = True) -> int:
        return sum(
            v.size for k, v in self.params.items()
            if include_embedding or k != "embedding"
        )

    def encode_tokens(self, tokens: list[str]) -> list[int]:
        return [self.token_to_id.get(t, OOV_ID) for t in tokens]

    def make_batch(self, token_lists, labels=None) -> Batch:
        t = self.config.max_tokens
        ids = np.full((len(token_lists), t), PAD_ID, dtype=np.int64)
        lengths = np.zeros(len(token_lists), dtype=np.int64)
        for i, toks in enumerate(token_lists):
            if not toks:
                raise ValueError(f"row {i}: empty token list")
            enc = self.encode_tokens(toks)[:t]
            ids[i, : len(enc)] = enc
            lengths[i] = len(enc)
        one_hot = None
        if labels is not None:
            one_hot = np.zeros((len(token_lists), self.config.classes))
            one_hot[np.arange(len(token_lists)), np.asarray(labels, dtype=int)] = 1.0
        return Batch(ids=ids, lengths=lengths, labels=one_hot)

    # ----- forward ---------------------------------------------------------

    def _conv_forward(self, x, w, b):
        # x (B,T,C), w (F,K,C) -> same-padded (B,T,F)
        kernel = w.shape[1]
        pl = (kernel - 1) // 2
        pr = kernel - 1 - pl
        xp = np.pad(x, ((0, 0), (pl, pr), (0, 0)))
        win = np.lib.stride_tricks.sliding_window_view(xp, kernel, axis=1)
        # win (B,T,C,K); contract C and K
        z = np.tensordot(win, w, axes=([2, 3], [2, 1])) + b
        return z, (x.shape, win, pl)

    def _conv_backward(self, dz, w, cache):
        x_shape, win, pl = cache
        kernel = w.shape[1]
        dw = np.tensordot(dz, win, axes=([0, 1], [0, 1])).transpose(0, 2, 1)
        db = dz.sum(axis=(0, 1))
        dwin = np.tensordot(dz, w, axes=([2], [0]))  # (B,T,K,C)
        b, t, _ = x_shape
        dxp = np.zeros((b, t + kernel - 1, x_shape[2]))
        for k in range(kernel):
            dxp[:, k:k + t, :] += dwin[:, :, k, :]
        return dxp[:, pl:pl + t, :], dw, db

    def _lstm_forward(self, seq, mask, direction: str):
        wx = self.params[f"lstm_{direction}_wx"]
        wh = self.params[f"lstm_{direction}_wh"]
        bias = self.params[f"lstm_{direction}_b"]
        b, t, _ = seq.shape
        hdim = self.config.lstm_hidden
        h = np.zeros((b, hdim))
        c = np.zeros((b, hdim))
        steps = range(t) if direction == "fwd" else range(t - 1, -1, -1)
        cache = []
        for ti in steps:
            x = seq[:, ti, :]
            z = x @ wx + h @ wh + bias
            zi, zf, zg, zo = np.split(z, 4, axis=1)
            gi, gf, go = _sigmoid(zi), _sigmoid(zf), _sigmoid(zo)
            gg = np.tanh(zg)
            c_new = gf * c + gi * gg
            tc = np.tanh(c_new)
            h_new = go * tc
            m = mask[:, ti:ti + 1]
            cache.append((ti, x, h, c, gi, gf, gg, go, c_new, tc, m))
            h = m * h_new + (1 - m) * h
            c = m * c_new + (1 - m) * c
        return h, cache

    def _lstm_backward(self, dh_final, cache, direction: str, dseq):
        wx = self.params[f"lstm_{direction}_wx"]
        wh = self.params[f"lstm_{direction}_wh"]
        dwx = np.zeros_like(wx)
        dwh = np.zeros_like(wh)
        db = np.zeros_like(self.params[f"lstm_{direction}_b"])
        dh = dh_final
        dc = np.zeros_like(dh_final)
        for ti, x, h_prev, c_prev, gi, gf, gg, go, c_new, tc, m in reversed(cache):
            dh_new = dh * m
            dh_carry = dh * (1 - m)
            dc_new = dc * m
            dc_carry = dc * (1 - m)
            dgo = dh_new * tc
            dc_new = dc_new + dh_new * go * (1 - tc ** 2)
            dgf = dc_new * c_prev
            dgi = dc_new * gg
            dgg = dc_new * gi
            dc_prev = dc_new * gf + dc_carry
            dz = np.concatenate([
                dgi * gi * (1 - gi),
                dgf * gf * (1 - gf),
                dgg * (1 - gg ** 2),
                dgo * go * (1 - go),
            ], axis=1)
            dwx += x.T @ dz
            dwh += h_prev.T @ dz
            db += dz.sum(axis=0)
            dseq[:, ti, :] += dz @ wx.T
            dh = dz @ wh.T + dh_carry
            dc = dc_prev
        return dwx, dwh, db

    def forward(self, batch: Batch, train: bool = False, rng=None):
        """Returns (probabilities, cache); dropout is active only when train."""
        cfg = self.config
        p = self.params
        if train and rng is None:
            rng = np.random.default_rng(cfg.seed)
        emb = p["embedding"]
        pad_mask = (batch.ids != PAD_ID)[:, :, None].astype(np.float64)
        x = emb[batch.ids] * pad_mask  # pad positions are zero vectors by contract
        lengths = np.minimum(batch.lengths, cfg.max_tokens).astype(np.int64)
        cache: dict = {"ids": batch.ids, "pad_mask": pad_mask, "convs": [], "pools": []}

        for li in range(len(cfg.conv_layers)):
            z, conv_cache = self._conv_forward(x, p[f"conv{li}_w"], p[f"conv{li}_b"])
            _check_finite(z, f"conv{li}")
            a = np.maximum(z, 0.0)
            cache["convs"].append((conv_cache, z))
            t = a.shape[1]
            if t >= cfg.pool and t // cfg.pool >= 1:
                tp = t // cfg.pool
                trimmed = a[:, : tp * cfg.pool, :].reshape(
                    a.shape[0], tp, cfg.pool, a.shape[2]
                )
                idx = trimmed.argmax(axis=2)
                pooled = np.take_along_axis(trimmed, idx[:, :, None, :], axis=2)[
                    :, :, 0, :
                ]
                cache["pools"].append((t, tp, idx))
                x = pooled
                lengths = np.minimum(tp, (lengths - 1) // cfg.pool + 1)
            else:
                cache["pools"].append(None)
                x = a

        b, t3, _ = x.shape
        mask = (np.arange(t3)[None, :] < lengths[:, None]).astype(np.float64)
        cache["seq"] = x
        cache["mask"] = mask
        h_fwd, cache_fwd = self._lstm_forward(x, mask, "fwd")
        h_bwd, cache_bwd = self._lstm_forward(x, mask, "bwd")
        cache["lstm_fwd"] = cache_fwd
        cache["lstm_bwd"] = cache_bwd
        hcat = np.concatenate([h_fwd, h_bwd], axis=1)
        _check_finite(hcat, "bilstm")

        def dropout_mask(shape, rate):
            if not train or rate == 0.0:
                return np.ones(shape)
            return (rng.random(shape) >= rate) / (1.0 - rate)

        m0 = dropout_mask(hcat.shape, cfg.dropout_lstm)
        a0 = hcat * m0
        z1 = a0 @ p["dense1_w"] + p["dense1_b"]
        a1 = _sigmoid(z1)
        m1 = dropout_mask(a1.shape, cfg.dropout_dense)
        a1d = a1 * m1
        z2 = a1d @ p["dense2_w"] + p["dense2_b"]
        a2 = _sigmoid(z2)
        logits = a2 @ p["out_w"] + p["out_b"]
        _check_finite(logits, "output")
        shifted = logits - logits.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        probs = exp / exp.sum(axis=1, keepdims=True)

        cache.update(hcat=hcat, m0=m0, a0=a0, a1=a1, m1=m1, a1d=a1d,
                     a2=a2, probs=probs)
        return probs, cache

    # ----- loss and gradients ---------------------------------------------

    @staticmethod
    def loss(probs: np.ndarray, labels: np.ndarray) -> float:
        """Mean categorical cross-entropy with probabilities clamped away from 0."""
        clamped = np.clip(probs, 1e-12, 1.0)
        return float(-(labels * np.log(clamped)).sum(axis=1).mean())

    def backward(self, cache: dict, labels: np.ndarray) -> dict[str, np.ndarray]:
        cfg = self.config
        p = self.params
        b = labels.shape[0]
        grads = {}

        dlogits = (cache["probs"] - labels) / b
        grads["out_w"] = cache["a2"].T @ dlogits
        grads["out_b"] = dlogits.sum(axis=0)
        da2 = dlogits @ p["out_w"].T
        dz2 = da2 * cache["a2"] * (1 - cache["a2"])
        grads["dense2_w"] = cache["a1d"].T @ dz2
        grads["dense2_b"] = dz2.sum(axis=0)
        da1 = (dz2 @ p["dense2_w"].T) * cache["m1"]
        dz1 = da1 * cache["a1"] * (1 - cache["a1"])
        grads["dense1_w"] = cache["a0"].T @ dz1
        grads["dense1_b"] = dz1.sum(axis=0)
        dhcat = (dz1 @ p["dense1_w"].T) * cache["m0"]

        hdim = cfg.lstm_hidden
        dseq = np.zeros_like(cache["seq"])
        for direction, sl in (("fwd", slice(0, hdim)), ("bwd", slice(hdim, None))):
            dwx, dwh, db = self._lstm_backward(
                dhcat[:, sl], cache[f"lstm_{direction}"], direction, dseq
            )
            grads[f"lstm_{direction}_wx"] = dwx
            grads[f"lstm_{direction}_wh"] = dwh
            grads[f"lstm_{direction}_b"] = db

        dx = dseq
        for li in range(len(cfg.conv_layers) - 1, -1, -1):
            pool = cache["pools"][li]
            conv_cache, z = cache["convs"][li]
            if pool is not None:
                t, tp, idx = pool
                da = np.zeros((dx.shape[0], t, dx.shape[2]))
                dtr = da[:, : tp * cfg.pool, :].reshape(
                    dx.shape[0], tp, cfg.pool, dx.shape[2]
                )
                np.put_along_axis(dtr, idx[:, :, None, :], dx[:, :, None, :], axis=2)
                da[:, : tp * cfg.pool, :] = dtr.reshape(
                    dx.shape[0], tp * cfg.pool, dx.shape[2]
                )
            else:
                da = dx
            dz = da * (z > 0)
            dx, dw, db = self._conv_backward(dz, p[f"conv{li}_w"], conv_cache)
            grads[f"conv{li}_w"] = dw
            grads[f"conv{li}_b"] = db

        demb = np.zeros_like(p["embedding"])
        dx = dx * cache["pad_mask"]
        np.add.at(demb, cache["ids"].ravel(), dx.reshape(-1, dx.shape[2]))
        demb[PAD_ID] = 0.0
        grads["embedding"] = demb

        for k, g in grads.items():
            _check_finite(g, f"gradient of {k}")
        return grads

    # ----- optimization ----------------------------------------------------

    def adam_step(self, grads: dict[str, np.ndarray], lr: float | None = None,
                  beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr is None:
            lr = self.config.learning_rate
        self.adam_t += 1
        t = self.adam_t
        for k in self.trainable_keys():
            g = grads[k]
            self.adam_m[k] = beta1 * self.adam_m[k] + (1 - beta1) * g
            self.adam_v[k] = beta2 * self.adam_v[k] + (1 - beta2) * g * g
            m_hat = self.adam_m[k] / (1 - beta1 ** t)
            v_hat = self.adam_v[k] / (1 - beta2 ** t)
            self.params[k] -= lr * m_hat / (np.sqrt(v_hat) + eps)

    def train(
        self,
        data: list[tuple[list[str], int]],
        epochs: int,
        val_split: float = 0.1,
        shuffle_seed: int | None = None,
    ) -> TrainReport:
        """Mini-batch Adam; keeps the parameters of the min-validation-loss epoch."""
        cfg = self.config
        rng = np.random.default_rng(
            cfg.seed if shuffle_seed is None else shuffle_seed
        )
        data = list(data)
        order = rng.permutation(len(data))
        n_val = int(round(len(data) * val_split))
        val_idx = order[:n_val]
        train_idx = order[n_val:]
        train_set = [data[i] for i in train_idx]
        val_set = [data[i] for i in val_idx]

        present = {label for _, label in train_set}
        missing = set(range(cfg.classes)) - present
        if missing:
            raise ValueError(f"classes missing from training split: {sorted(missing)}")

        report = TrainReport()
        best_loss = np.inf
        best_params = None
        best_state = None
        for epoch in range(epochs):
            perm = rng.permutation(len(train_set))
            epoch_loss = 0.0
            correct = 0
            for start in range(0, len(train_set), cfg.batch_size):
                chunk = [train_set[i] for i in perm[start:start + cfg.batch_size]]
                batch = self.make_batch(
                    [toks for toks, _ in chunk], [lab for _, lab in chunk]
                )
                probs, cache = self.forward(batch, train=True, rng=rng)
                epoch_loss += self.loss(probs, batch.labels) * len(chunk)
                correct += int(
                    (probs.argmax(axis=1) == batch.labels.argmax(axis=1)).sum()
                )
                grads = self.backward(cache, batch.labels)
                self.adam_step(grads)
            report.train_loss.append(epoch_loss / len(train_set))
            report.train_accuracy.append(correct / len(train_set))

            if val_set:
                vloss, vacc = self._evaluate_loss(val_set)
                report.val_loss.append(vloss)
                report.val_accuracy.append(vacc)
                if vloss < best_loss:
                    best_loss = vloss
                    best_params = copy.deepcopy(self.params)
                    best_state = (
                        copy.deepcopy(self.adam_m),
                        copy.deepcopy(self.adam_v),
                        self.adam_t,
                    )
                    report.best_epoch = epoch

        if val_set and best_params is not None:
            self.params = best_params
            self.adam_m, self.adam_v, self.adam_t = best_state
            report.early_stopped = report.best_epoch < epochs - 1
        else:
            report.best_epoch = epochs - 1
        return report

    def _evaluate_loss(self, dataset) -> tuple[float, float]:
        total = 0.0
        correct = 0
        for start in range(0, len(dataset), self.config.batch_size):
            chunk = dataset[start:start + self.config.batch_size]
            batch = self.make_batch(
                [toks for toks, _ in chunk], [lab for _, lab in chunk]
            )
            probs, _ = self.forward(batch)
            total += self.loss(probs, batch.labels) * len(chunk)
            correct += int(
                (probs.argmax(axis=1) == batch.labels.argmax(axis=1)).sum()
            )
        return total / len(dataset), correct / len(dataset)

    # ----- inference -------------------------------------------------------

    def predict_tokens(self, tokens: list[str]) -> tuple[SentimentLabel, np.ndarray]:
        """Chunk long comments and average the per-chunk probability vectors."""
        if not tokens:
            raise ValueError("empty token list")
        t = self.config.max_tokens
        chunks = [tokens[i:i + t] for i in range(0, len(tokens), t)]
        batch = self.make_batch(chunks)
        probs, _ = self.forward(batch)
        mean = probs.mean(axis=0)
        # argmax breaks ties toward the lower class code
        return SentimentLabel(int(mean.argmax())), mean

    def evaluate(
        self, data: list[tuple[list[str], int]]
    ) -> tuple[float, ConfusionMatrix]:
        if not data:
            raise ValueError("empty test set")
        predicted = []
        actual = []
        for tokens, label in data:
            pred, _ = self.predict_tokens(tokens)
            predicted.append(int(pred))
            actual.append(int(label))
        cm = confusion(
            predicted, actual, self.config.classes,
            [lbl.name for lbl in SentimentLabel],
        )
        accuracy = sum(p == a for p, a in zip(predicted, actual)) / len(data)
        return accuracy, cm

    # ----- persistence -----------------------------------------------------

    def save(self, path) -> None:
        names = sorted(self.params)
        meta = {
            "config": {
                **{k: getattr(self.config, k) for k in (
                    "embed_dim", "max_tokens", "pool", "lstm_hidden",
                    "dropout_lstm", "dropout_dense", "classes", "seed",
                    "batch_size", "learning_rate", "fine_tune_embeddings",
                )},
                "conv_layers": [list(c) for c in self.config.conv_layers],
                "dense_sizes": list(self.config.dense_sizes),
            },
            "id_to_token": self.id_to_token,
            "tensors": [[n, list(self.params[n].shape)] for n in names],
        }
        blob = json.dumps(meta).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(CHECKPOINT_MAGIC)
            fh.write(struct.pack("<ii", CHECKPOINT_VERSION, len(blob)))
            fh.write(blob)
            for n in names:
                fh.write(self.params[n].astype("<f4").tobytes())

    @classmethod
    def load(cls, path) -> "SentimentNet":
        with open(path, "rb") as fh:
            if fh.read(4) != CHECKPOINT_MAGIC:
                raise ValueError("not a checkpoint file (bad magic bytes)")
            version, blob_len = struct.unpack("<ii", fh.read(8))
            if version != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {version}")
            meta = json.loads(fh.read(blob_len).decode("utf-8"))
            config = ModelConfig(**meta["config"])
            shell = _empty_embeddings(meta["id_to_token"], config.embed_dim)
            model = cls(config, shell)
            for name, shape in meta["tensors"]:
                size = int(np.prod(shape))
                data = np.frombuffer(fh.read(size * 4), dtype="<f4")
                if data.size != size:
                    raise ValueError(f"checkpoint truncated in tensor {name}")
                model.params[name] = data.astype(np.float64).reshape(shape)
            model.adam_m = {k: np.zeros_like(v) for k, v in model.params.items()}
            model.adam_v = {k: np.zeros_like(v) for k, v in model.params.items()}
            model.adam_t = 0
        return model


def _empty_embeddings(tokens: list[str], dim: int) -> EmbeddingMatrix:
    from .embeddings import Vocabulary

    vocab = Vocabulary(
        token_to_id={t: i for i, t in enumerate(tokens)},
        id_to_token=list(tokens),
        counts=np.zeros(len(tokens), dtype=np.int64),
        min_count=0,
    )
    return EmbeddingMatrix(dim=dim, vocab=vocab, vectors=np.zeros((len(tokens), dim)))
