"""Phrase-lexicon sentiment scoring and 5-class labeling.

A comment's score is

    (sum of matched phrase scores + C + S + E) / (N + |C| + |S| + |E|)

where N counts matched phrases, C rewards fully-capitalized matches,
S rewards matches ending in "!", and E sums emoji polarities. The
absolute values in the denominator keep the score inside [-1, 1]; a
strict mode with the raw signed denominator is available but can hit a
zero denominator, which raises.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import IntEnum

from .preprocess import CleanComment, normalize_text, parse_timestamp, stem, tokenize


class SentimentLabel(IntEnum):
    VERY_NEGATIVE = 0
    NEGATIVE = 1
    NEUTRAL = 2
    POSITIVE = 3
    VERY_POSITIVE = 4


@dataclass(frozen=True)
class LexiconEntry:
    phrase: tuple[str, ...]
    score: float


@dataclass
class Lexicon:
    entries: list[LexiconEntry]
    max_n: int = 4
    index: dict[tuple[str, ...], LexiconEntry] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {e.phrase: e for e in self.entries}


@dataclass(frozen=True)
class Match:
    entry: LexiconEntry
    start: int
    end: int  # exclusive


@dataclass
class ScoreBreakdown:
    matches: list[Match]
    sum_L: float
    C: int
    S: int
    E: int

    @property
    def N(self) -> int:
        return len(self.matches)


class StrictDenominatorError(ZeroDivisionError):
    """Raised in strict mode when N + C + S + E is zero with matches present."""


def preprocess_phrase(raw_phrase: str) -> tuple[str, ...]:
    """Run a lexicon phrase through the same normalize/stem pipeline as comments."""
    return tuple(stem(tok) for tok, _, _ in tokenize(normalize_text(raw_phrase)))


def load_lexicon(path, max_n: int = 4) -> tuple[Lexicon, list[tuple[int, str]]]:
    """Load "phrase<TAB>score" lines; invalid entries are rejected with line numbers."""
    entries: list[LexiconEntry] = []
    seen: dict[tuple[str, ...], int] = {}
    rejects: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                rejects.append((lineno, "expected phrase<TAB>score"))
                continue
            try:
                score = float(parts[1])
            except ValueError:
                rejects.append((lineno, f"bad score {parts[1]!r}"))
                continue
            if not -1.0 <= score <= 1.0:
                rejects.append((lineno, f"score {score} outside [-1, 1]"))
                continue
            phrase = preprocess_phrase(parts[0])
            if not 1 <= len(phrase) <= max_n:
                rejects.append((lineno, f"phrase has {len(phrase)} tokens (limit {max_n})"))
                continue
            if phrase in seen:
                rejects.append((lineno, f"duplicate of line {seen[phrase]}"))
                continue
            seen[phrase] = lineno
            entries.append(LexiconEntry(phrase, score))
    return Lexicon(entries, max_n=max_n), rejects


def load_emoji_table(path) -> dict[str, int]:
    table: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            emoji, polarity = line.split("\t")
            polarity = int(polarity)
            if polarity not in (1, -1):
                raise ValueError(f"emoji polarity must be +1 or -1, got {polarity}")
            table[emoji] = polarity
    return table


def match_lexicons(comment: CleanComment, lex: Lexicon) -> list[Match]:
    """Greedy left-to-right longest match over stemmed token n-grams."""
    tokens = comment.tokens
    matches: list[Match] = []
    i = 0
    while i < len(tokens):
        for n in range(min(lex.max_n, len(tokens) - i), 0, -1):
            entry = lex.index.get(tuple(tokens[i:i + n]))
            if entry is not None:
                matches.append(Match(entry, i, i + n))
                i += n
                break
        else:
            i += 1
    return matches


def _polarity(score: float) -> int:
    return 1 if score > 0 else (-1 if score < 0 else 0)


def compute_C(matches: list[Match], caps_flags: list[bool]) -> int:
    """+/-1 per match whose whole span was written in capitals."""
    return sum(
        _polarity(m.entry.score)
        for m in matches
        if all(caps_flags[m.start:m.end])
    )


def compute_S(matches: list[Match], exclaim_flags: list[bool]) -> int:
    """+/-1 per match whose final token is attached to a "!"."""
    return sum(
        _polarity(m.entry.score) for m in matches if exclaim_flags[m.end - 1]
    )


def compute_E(emojis: list[str], table: dict[str, int]) -> int:
    return sum(table.get(e, 0) for e in emojis)


def senti_score(b: ScoreBreakdown, strict: bool = False) -> float:
    if strict:
        denom = b.N + b.C + b.S + b.E
        if denom == 0 and (b.N or b.C or b.S or b.E):
            raise StrictDenominatorError(
                f"signed denominator is zero (N={b.N} C={b.C} S={b.S} E={b.E})"
            )
    else:
        denom = b.N + abs(b.C) + abs(b.S) + abs(b.E)
    if denom == 0:
        return 0.0
    return (b.sum_L + b.C + b.S + b.E) / denom


def classify(score: float) -> SentimentLabel:
    if score >= 0.5:
        return SentimentLabel.VERY_POSITIVE
    if score > 0:
        return SentimentLabel.POSITIVE
    if score == 0:
        return SentimentLabel.NEUTRAL
    if score > -0.5:
        return SentimentLabel.NEGATIVE
    return SentimentLabel.VERY_NEGATIVE


def score_comment(
    comment: CleanComment,
    lex: Lexicon,
    emoji_table: dict[str, int],
    strict: bool = False,
) -> tuple[ScoreBreakdown, float]:
    matches = match_lexicons(comment, lex)
    breakdown = ScoreBreakdown(
        matches=matches,
        sum_L=sum(m.entry.score for m in matches),
        C=compute_C(matches, comment.caps_flags),
        S=compute_S(matches, comment.exclaim_flags),
        E=compute_E(comment.emojis, emoji_table),
    )
    return breakdown, senti_score(breakdown, strict=strict)


@dataclass
class LabeledComment:
    comment: CleanComment
    score: float
    label: SentimentLabel


def label_corpus(
    comments: list[CleanComment],
    lex: Lexicon,
    emoji_table: dict[str, int],
    strict: bool = False,
) -> tuple[list[LabeledComment], Counter]:
    """Score every comment; returns the labeled list and a class distribution."""
    labeled: list[LabeledComment] = []
    distribution: Counter = Counter()
    for comment in comments:
        _, score = score_comment(comment, lex, emoji_table, strict=strict)
        label = classify(score)
        labeled.append(LabeledComment(comment, score, label))
        distribution[label] += 1
    return labeled, distribution


def save_labeled_jsonl(labeled: list[LabeledComment], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for lc in labeled:
            c = lc.comment
            fh.write(json.dumps({
                "post_id": c.post_id,
                "comment_id": c.comment_id,
                "created_time": c.created_time.isoformat().replace("+00:00", "Z"),
                "tokens": c.tokens,
                "emojis": c.emojis,
                "caps_flags": c.caps_flags,
                "exclaim_flags": c.exclaim_flags,
                "original_text": c.original_text,
                "score": lc.score,
                "label": int(lc.label),
            }, ensure_ascii=False) + "\n")


def load_labeled_jsonl(path) -> list[LabeledComment]:
    out: list[LabeledComment] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            comment = CleanComment(
                post_id=obj["post_id"],
                comment_id=obj["comment_id"],
                created_time=parse_timestamp(obj["created_time"]),
                tokens=list(obj["tokens"]),
                emojis=list(obj.get("emojis", [])),
                caps_flags=[bool(x) for x in obj.get("caps_flags", [])],
                exclaim_flags=[bool(x) for x in obj.get("exclaim_flags", [])],
                original_text=obj.get("original_text", ""),
            )
            out.append(LabeledComment(
                comment, float(obj["score"]), SentimentLabel(int(obj["label"]))
            ))
    return out
