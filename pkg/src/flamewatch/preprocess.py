"""Comment ingestion and text normalization.

The cleaning pipeline mirrors what the rest of the package expects:
URLs/mentions/hashtags stripped, elongated words squeezed, spaced-out
letters merged, emoji kept, everything stemmed, stopwords kept.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import porter

# Unicode blocks treated as emoji. Variation selectors and ZWJ are stripped
# as special characters, so multi-codepoint sequences decompose into their
# base emoji.
_EMOJI_RANGES = (
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F900, 0x1FAFF),
    (0x2600, 0x26FF),
    (0x2700, 0x27BF),
    (0x2B00, 0x2BFF),
    (0x1F1E6, 0x1F1FF),
)

_URL_RE = re.compile(r"(?:(?:https?|ftp)://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#\w+")
_RETWEET_RE = re.compile(r"\bRT\b")
# >=3 single-letter units separated by spaces or dots ("h a p p y", "h.a.p.p.y")
_SPACED_LETTERS_RE = re.compile(
    r"(?<![A-Za-z0-9])[A-Za-z](?:[ .]+[A-Za-z]){2,}(?![A-Za-z0-9])"
)
_LETTER_RUN_RE = re.compile(r"([A-Za-z])\1{2,}")
_SPACES_RE = re.compile(r"\s+")


def is_emoji(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


def _keep_char(ch: str) -> bool:
    return ch.isalnum() or ch == "!" or ch.isspace() or is_emoji(ch)


@dataclass
class RawComment:
    post_id: str
    comment_id: str
    created_time: datetime
    text: str


@dataclass
class CleanComment:
    post_id: str
    comment_id: str
    created_time: datetime
    tokens: list[str]
    emojis: list[str]
    caps_flags: list[bool]
    exclaim_flags: list[bool]
    original_text: str


@dataclass
class Corpus:
    comments: list[CleanComment]
    source_path: str = ""
    loaded: int = 0
    dropped: int = 0

    @property
    def kept(self) -> int:
        return len(self.comments)


@dataclass
class LineError:
    lineno: int
    message: str


def parse_timestamp(value: str) -> datetime:
    """ISO-8601 -> aware UTC datetime; naive inputs are assumed UTC."""
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def load_jsonl(path) -> tuple[list[RawComment], list[LineError]]:
    """Read one comment per line; malformed lines are skipped and reported."""
    comments: list[RawComment] = []
    errors: list[LineError] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                comments.append(
                    RawComment(
                        post_id=str(obj["post_id"]),
                        comment_id=str(obj["comment_id"]),
                        created_time=parse_timestamp(obj["created_time"]),
                        text=str(obj["message"]),
                    )
                )
                if not obj["post_id"] or not obj["comment_id"]:
                    comments.pop()
                    raise ValueError("empty post_id or comment_id")
            except (KeyError, ValueError, TypeError) as exc:
                errors.append(LineError(lineno, f"{type(exc).__name__}: {exc}"))
    return comments, errors


def normalize_text(text: str) -> str:
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = _HASHTAG_RE.sub(" ", text)
    text = "".join(ch if _keep_char(ch) else (" " if ch != "'" else "") for ch in text)
    # the remaining rules can feed each other (collapsing "RRRT" exposes an
    # "RT" marker, merging "a a a" creates a collapsible "aaa"), so iterate
    # them to a fixed point; each round strictly shrinks the text, and the
    # earlier filters cannot re-trigger on filtered text, so the whole
    # function is idempotent
    prev = None
    while text != prev:
        prev = text
        text = _RETWEET_RE.sub(" ", text)
        text = _SPACES_RE.sub(" ", text).strip()
        text = _SPACED_LETTERS_RE.sub(lambda m: re.sub(r"[ .]+", "", m.group(0)), text)
        text = _LETTER_RUN_RE.sub(r"\1", text)
    return text


def tokenize(text: str) -> list[tuple[str, bool, bool]]:
    """Split normalized text into (token, caps_flag, exclaim_flag) triples.

    Emoji are emitted as standalone tokens; "!" marks the preceding token
    and is never a token itself.
    """
    out: list[tuple[str, bool, bool]] = []
    for chunk in text.split():
        # segment the chunk into word runs, emoji chars and "!" runs
        segments: list[str] = []

        def _is_word_segment(seg: str) -> bool:
            return not seg.endswith("!") and not (len(seg) == 1 and is_emoji(seg))

        for ch in chunk:
            if is_emoji(ch):
                segments.append(ch)
            elif ch == "!":
                if segments and segments[-1].endswith("!"):
                    segments[-1] += "!"
                else:
                    segments.append("!")
            elif segments and _is_word_segment(segments[-1]):
                segments[-1] += ch
            else:
                segments.append(ch)
        for i, seg in enumerate(segments):
            if seg.startswith("!"):
                continue
            caps = len(seg) >= 2 and seg.isalpha() and seg.isupper()
            excl = i + 1 < len(segments) and segments[i + 1].startswith("!")
            out.append((seg.lower(), caps, excl))
    return out


def stem(token: str) -> str:
    """Porter stem for plain lowercase words; anything else passes through."""
    return porter.stem(token)


def preprocess(raw: RawComment) -> CleanComment | None:
    """normalize -> tokenize -> stem; returns None when nothing survives."""
    normalized = normalize_text(raw.text)
    triples = tokenize(normalized)
    if not triples:
        return None
    tokens = [stem(tok) for tok, _, _ in triples]
    return CleanComment(
        post_id=raw.post_id,
        comment_id=raw.comment_id,
        created_time=raw.created_time,
        tokens=tokens,
        emojis=[t for t in tokens if len(t) == 1 and is_emoji(t)],
        caps_flags=[c for _, c, _ in triples],
        exclaim_flags=[e for _, _, e in triples],
        original_text=raw.text,
    )


def build_corpus(raws: list[RawComment], source_path: str = "") -> Corpus:
    corpus = Corpus(comments=[], source_path=source_path, loaded=len(raws))
    for raw in raws:
        clean = preprocess(raw)
        if clean is None:
            corpus.dropped += 1
        else:
            corpus.comments.append(clean)
    return corpus


def save_clean_jsonl(comments: list[CleanComment], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in comments:
            fh.write(json.dumps({
                "post_id": c.post_id,
                "comment_id": c.comment_id,
                "created_time": c.created_time.isoformat().replace("+00:00", "Z"),
                "tokens": c.tokens,
                "emojis": c.emojis,
                "caps_flags": c.caps_flags,
                "exclaim_flags": c.exclaim_flags,
                "original_text": c.original_text,
            }, ensure_ascii=False) + "\n")


def load_clean_jsonl(path) -> list[CleanComment]:
    out: list[CleanComment] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out.append(CleanComment(
                post_id=obj["post_id"],
                comment_id=obj["comment_id"],
                created_time=parse_timestamp(obj["created_time"]),
                tokens=list(obj["tokens"]),
                emojis=list(obj["emojis"]),
                caps_flags=[bool(x) for x in obj["caps_flags"]],
                exclaim_flags=[bool(x) for x in obj["exclaim_flags"]],
                original_text=obj["original_text"],
            ))
    return out
