"""Command-line pipeline: preprocess, label, train-embed, train-clf,
predict, evaluate, detect.

Every command prints a one-line JSON summary on stdout and uses exit
codes 0 (ok), 1 (internal error), 2 (input error). Defaults can come
from an INI-style config file (key=value under [paths], [embedding],
[model], [detect]); explicit flags win over the config file. Output
files are written to a temp file and atomically renamed.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import tempfile

import numpy as np

from . import data_path, embeddings, fixtures, flaming, lexicon, metrics, network, preprocess


class InputError(Exception):
    """User-facing problem with inputs; maps to exit code 2."""


def _require_file(path) -> str:
    if not os.path.isfile(path):
        raise InputError(f"input file not found: {path}")
    return path


def _atomic(path, writer) -> None:
    """Run writer(tmp_path) then rename tmp_path (and a .subword sidecar) over path."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
        if os.path.exists(tmp + ".subword"):
            os.replace(tmp + ".subword", str(path) + ".subword")
    except BaseException:
        for leftover in (tmp, tmp + ".subword"):
            if os.path.exists(leftover):
                os.unlink(leftover)
        raise


def _emit(summary: dict) -> None:
    print(json.dumps(summary, ensure_ascii=False))


def _load_config(path) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    if path:
        _require_file(path)
        cfg.read(path)
    return cfg


def _cfg_get(cfg, section, key, fallback=None):
    try:
        return cfg.get(section, key)
    except (configparser.NoSectionError, configparser.NoOptionError):
        return fallback


# ----- subcommands ----------------------------------------------------------


def cmd_preprocess(args, cfg) -> int:
    raws, errors = preprocess.load_jsonl(_require_file(args.input))
    corpus = preprocess.build_corpus(raws, source_path=args.input)
    _atomic(args.output, lambda p: preprocess.save_clean_jsonl(corpus.comments, p))
    print(f"kept={corpus.kept} dropped={corpus.dropped}", file=sys.stderr)
    _emit({
        "command": "preprocess",
        "kept": corpus.kept,
        "dropped": corpus.dropped,
        "line_errors": len(errors),
    })
    return 0


def _load_lexicon_args(args, cfg):
    lex_path = args.lexicon or _cfg_get(cfg, "paths", "lexicon") or str(
        data_path("mini_lexicon.tsv")
    )
    emoji_path = args.emoji_table or _cfg_get(cfg, "paths", "emoji_table") or str(
        data_path("emoji_polarity.tsv")
    )
    lex, rejects = lexicon.load_lexicon(_require_file(lex_path), max_n=args.max_n)
    table = lexicon.load_emoji_table(_require_file(emoji_path))
    return lex, table, rejects


def cmd_label(args, cfg) -> int:
    lex, table, rejects = _load_lexicon_args(args, cfg)
    comments = preprocess.load_clean_jsonl(_require_file(args.input))
    labeled, dist = lexicon.label_corpus(
        comments, lex, table, strict=args.strict_eq1
    )
    _atomic(args.output, lambda p: lexicon.save_labeled_jsonl(labeled, p))
    _emit({
        "command": "label",
        "labeled": len(labeled),
        "lexicon_rejects": len(rejects),
        "distribution": {str(int(k)): v for k, v in sorted(dist.items())},
    })
    return 0


def cmd_train_embed(args, cfg) -> int:
    comments = preprocess.load_clean_jsonl(_require_file(args.input))
    sentences = [c.tokens for c in comments]
    subword = None
    if args.method == "fasttext":
        subword = embeddings.SubwordConfig(
            min_n=args.subword_min_n, max_n=args.subword_max_n, buckets=args.buckets
        )
    config = embeddings.EmbedConfig(
        dim=args.dim, window=args.window, negatives=args.negatives,
        epochs=args.epochs, initial_lr=args.lr, min_count=args.min_count,
        seed=args.seed, subword=subword,
    )
    if args.method == "word2vec":
        matrix = embeddings.train_word2vec(sentences, config)
    else:
        matrix = embeddings.train_fasttext(sentences, config)
    _atomic(args.output, lambda p: embeddings.save_embeddings(matrix, p))
    _emit({
        "command": "train-embed",
        "method": args.method,
        "vocab": len(matrix.vocab),
        "dim": matrix.dim,
        "epoch_losses": matrix.epoch_losses,
    })
    return 0


def cmd_train_clf(args, cfg) -> int:
    labeled = lexicon.load_labeled_jsonl(_require_file(args.input))
    matrix = embeddings.load_embeddings(_require_file(args.embeddings))
    config = network.ModelConfig(
        embed_dim=matrix.dim,
        max_tokens=args.max_tokens,
        conv_layers=tuple((args.filters, args.kernel) for _ in range(3)),
        lstm_hidden=args.lstm_hidden,
        dense_sizes=tuple(args.dense),
        dropout_lstm=args.dropout_lstm,
        dropout_dense=args.dropout_dense,
        seed=args.seed,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        fine_tune_embeddings=args.fine_tune,
    )
    model = network.SentimentNet(config, matrix)
    data = [(lc.comment.tokens, int(lc.label)) for lc in labeled]
    report = model.train(data, epochs=args.epochs, val_split=args.val_split)
    _atomic(args.output, model.save)
    _emit({
        "command": "train-clf",
        "examples": len(data),
        "parameters": model.num_parameters(),
        "best_epoch": report.best_epoch,
        "early_stopped": report.early_stopped,
        "train_loss": report.train_loss,
        "val_loss": report.val_loss,
    })
    return 0


def cmd_predict(args, cfg) -> int:
    model = network.SentimentNet.load(_require_file(args.model))
    comments = preprocess.load_clean_jsonl(_require_file(args.input))

    def write(path):
        with open(path, "w", encoding="utf-8") as fh:
            for c in comments:
                label, probs = model.predict_tokens(c.tokens)
                fh.write(json.dumps({
                    "post_id": c.post_id,
                    "comment_id": c.comment_id,
                    "label": int(label),
                    "probabilities": [float(p) for p in probs],
                }, ensure_ascii=False) + "\n")

    _atomic(args.output, write)
    _emit({"command": "predict", "predicted": len(comments)})
    return 0


def cmd_evaluate(args, cfg) -> int:
    if args.matrix_json:
        with open(_require_file(args.matrix_json), encoding="utf-8") as fh:
            obj = json.load(fh)
        if args.key:
            obj = obj[args.key]
        cm = metrics.ConfusionMatrix(
            counts=np.array(obj["counts"]),
            class_names=list(obj["class_names"]),
        )
        accuracy = float(cm.counts.trace() / cm.counts.sum())
    else:
        if not args.model or not args.input:
            raise InputError("evaluate needs either --matrix-json or --model and INPUT")
        model = network.SentimentNet.load(_require_file(args.model))
        labeled = lexicon.load_labeled_jsonl(_require_file(args.input))
        data = [(lc.comment.tokens, int(lc.label)) for lc in labeled]
        accuracy, cm = model.evaluate(data)
    mm = metrics.macro_metrics(cm, orientation=args.orientation)
    print(metrics.format_table(cm, mm), file=sys.stderr)
    _emit({
        "command": "evaluate",
        "accuracy": accuracy,
        "orientation": mm.orientation,
        "macro_precision": mm.macro_precision,
        "macro_recall": mm.macro_recall,
        "macro_f1": mm.macro_f1,
        "per_class_precision": mm.per_class_precision.tolist(),
        "per_class_recall": mm.per_class_recall.tolist(),
    })
    return 0


def cmd_detect(args, cfg) -> int:
    labeled = lexicon.load_labeled_jsonl(_require_file(args.input))
    stats = flaming.post_stats(labeled)
    events = flaming.detect(
        stats,
        labeled=labeled,
        z_threshold=args.z_threshold,
        share_threshold=args.share_threshold,
        window_hours=args.window_hours,
        sample_std=args.sample_std,
        include_negative=args.include_negative,
    )
    buckets = flaming.aggregate(labeled, width=args.width)
    os.makedirs(args.output_dir, exist_ok=True)
    json_path = os.path.join(args.output_dir, "events.json")
    csv_path = os.path.join(args.output_dir, "timeseries.csv")
    flaming.write_report(events, buckets, json_path, csv_path)
    _emit({
        "command": "detect",
        "posts": len(stats),
        "events": [flaming.event_to_dict(e) for e in events],
        "report_json": json_path,
        "timeseries_csv": csv_path,
    })
    return 0


def cmd_make_fixture(args, cfg) -> int:
    if args.kind == "synthetic":
        records = fixtures.synthetic_comments(args.comments, seed=args.seed)
    else:
        records, planted = fixtures.flaming_comments(seed=args.seed)
        print(f"planted={','.join(planted)}", file=sys.stderr)
    _atomic(args.output, lambda p: fixtures.write_raw_jsonl(records, p))
    _emit({"command": "make-fixture", "kind": args.kind, "records": len(records)})
    return 0


# ----- argument wiring ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flamewatch",
        description="Sentiment labeling and flaming-event detection pipeline.",
    )
    parser.add_argument("--config", help="INI config file with defaults")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1,
                        help="reserved; all bundled stages run single-threaded")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="clean a raw comment JSONL file")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("label", help="lexicon-score a preprocessed corpus")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--lexicon")
    p.add_argument("--emoji-table")
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--strict-eq1", action="store_true",
                   help="use the raw signed score denominator (may raise)")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train-embed", help="train word vectors")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--method", choices=("word2vec", "fasttext"), default="word2vec")
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--subword-min-n", type=int, default=3)
    p.add_argument("--subword-max-n", type=int, default=6)
    p.add_argument("--buckets", type=int, default=2 ** 21)
    p.set_defaults(func=cmd_train_embed)

    p = sub.add_parser("train-clf", help="train the CNN+BiLSTM classifier")
    p.add_argument("input", help="labeled JSONL")
    p.add_argument("output", help="checkpoint path")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--val-split", type=float, default=0.1)
    p.add_argument("--max-tokens", type=int, default=30)
    p.add_argument("--filters", type=int, default=64)
    p.add_argument("--kernel", type=int, default=3)
    p.add_argument("--lstm-hidden", type=int, default=64)
    p.add_argument("--dense", type=int, nargs=2, default=[128, 64])
    p.add_argument("--dropout-lstm", type=float, default=0.5)
    p.add_argument("--dropout-dense", type=float, default=0.5)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--fine-tune", action="store_true")
    p.set_defaults(func=cmd_train_clf)

    p = sub.add_parser("predict", help="predict labels for a clean corpus")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="macro metrics from a model or a matrix")
    p.add_argument("input", nargs="?")
    p.add_argument("--model")
    p.add_argument("--matrix-json")
    p.add_argument("--key", help="object key when the JSON holds several matrices")
    p.add_argument("--orientation", choices=("standard", "paper"), default="standard")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("detect", help="flag flaming posts in a labeled corpus")
    p.add_argument("input")
    p.add_argument("output_dir")
    p.add_argument("--z-threshold", type=float, default=5.0)
    p.add_argument("--share-threshold", type=float, default=0.20)
    p.add_argument("--window-hours", type=float, default=3.0)
    p.add_argument("--width", choices=("day", "hour"), default="day")
    p.add_argument("--sample-std", action="store_true")
    p.add_argument("--include-negative", action="store_true",
                   help="count Negative together with Very Negative")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("make-fixture", help="write a synthetic corpus")
    p.add_argument("output")
    p.add_argument("--kind", choices=("synthetic", "flaming"), default="synthetic")
    p.add_argument("--comments", type=int, default=500)
    p.set_defaults(func=cmd_make_fixture)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: input file not found: {exc.filename}", file=sys.stderr)
        return 2
    except (json.JSONDecodeError, embeddings.EmbeddingFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # unexpected -> internal error
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
