"""Text normalization, tokenization, stemming and corpus ingestion."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flamewatch import preprocess
from flamewatch.preprocess import (
    RawComment,
    build_corpus,
    is_emoji,
    load_clean_jsonl,
    load_jsonl,
    normalize_text,
    parse_timestamp,
    save_clean_jsonl,
    stem,
    tokenize,
)

# frozen reference pairs for the classic stemming algorithm, taken from its
# published step-by-step examples
PORTER_PAIRS = {
    "caresses": "caress", "ponies": "poni", "ties": "ti", "cats": "cat",
    "feed": "feed", "agreed": "agre", "plastered": "plaster",
    "motoring": "motor", "sing": "sing", "conflated": "conflat",
    "sized": "size", "hopping": "hop", "falling": "fall", "filing": "file",
    "happy": "happi", "sky": "sky", "relational": "relat",
    "conditional": "condit", "rational": "ration", "operator": "oper",
    "feudalism": "feudal", "hopefulness": "hope", "formative": "form",
    "hopeful": "hope", "goodness": "good", "allowance": "allow",
    "inference": "infer", "replacement": "replac", "adjustment": "adjust",
    "dependent": "depend", "adoption": "adopt", "communism": "commun",
    "activate": "activ", "effective": "effect", "probate": "probat",
    "rate": "rate", "cease": "ceas", "generalizations": "gener",
    "oscillators": "oscil", "running": "run", "troubled": "troubl",
    "troubles": "troubl", "controll": "control", "roll": "roll",
    "electriciti": "electr", "sensitiviti": "sensit", "radicalli": "radic",
}


class TestNormalize:
    def test_elongated_word_collapsed(self):
        assert normalize_text("haaappy") == "happy"

    def test_double_letters_kept(self):
        # only runs of 3+ collapse; "pp" must survive
        assert normalize_text("happy") == "happy"

    def test_dotted_letters_merged(self):
        assert normalize_text("h.a.p.p.y") == "happy"

    def test_spaced_letters_merged(self):
        assert normalize_text("h a p p y") == "happy"

    def test_two_spaced_letters_not_merged(self):
        # the merge needs at least 3 consecutive single-letter units
        assert normalize_text("I a") == "I a"

    def test_url_becomes_space(self):
        assert normalize_text("see https://x.co now") == "see now"

    def test_www_url_removed(self):
        assert normalize_text("go www.example.com ok") == "go ok"

    def test_mention_hashtag_retweet_removed(self):
        assert normalize_text("RT @user #topic hello") == "hello"

    def test_exclamation_kept(self):
        assert normalize_text("wow!") == "wow!"

    def test_emoji_kept(self):
        assert normalize_text("nice 🙂 day") == "nice 🙂 day"

    def test_apostrophe_deleted_not_spaced(self):
        assert normalize_text("don't") == "dont"

    def test_other_punctuation_becomes_space(self):
        assert normalize_text("ab,cd;ef") == "ab cd ef"

    def test_punctuated_single_letters_merge(self):
        # punctuation becomes spaces first, so 3+ single letters then merge
        assert normalize_text("a,b;c") == "abc"

    @settings(max_examples=300)
    @given(st.text(max_size=80))
    def test_idempotent(self, text):
        once = normalize_text(text)
        assert normalize_text(once) == once

    @settings(max_examples=200)
    @given(st.text(alphabet="ab c.!🙂😡@#x", max_size=40))
    def test_emoji_count_preserved(self, text):
        before = sum(1 for ch in text if is_emoji(ch))
        after = sum(1 for ch in normalize_text(text) if is_emoji(ch))
        assert after == before


class TestTokenize:
    def test_caps_and_exclaim_flags(self):
        assert tokenize("GREAT job!") == [
            ("great", True, False),
            ("job", False, True),
        ]

    def test_single_word(self):
        assert tokenize("ok") == [("ok", False, False)]

    def test_emoji_is_its_own_token(self):
        assert tokenize("wow 🙂") == [("wow", False, False), ("🙂", False, False)]

    def test_attached_emoji_split_off(self):
        assert tokenize("wow🙂") == [("wow", False, False), ("🙂", False, False)]

    def test_bang_never_a_token(self):
        tokens = [t for t, _, _ in tokenize("stop !! now!")]
        assert "!" not in tokens and tokens == ["stop", "now"]

    def test_single_letter_not_caps(self):
        assert tokenize("I") == [("i", False, False)]

    def test_multiple_bangs_one_flag(self):
        assert tokenize("no!!!") == [("no", False, True)]


class TestStem:
    @pytest.mark.parametrize("word,expected", sorted(PORTER_PAIRS.items()))
    def test_reference_pairs(self, word, expected):
        assert stem(word) == expected

    def test_emoji_passthrough(self):
        assert stem("🙂") == "🙂"

    def test_number_passthrough(self):
        assert stem("42") == "42"

    def test_short_word_passthrough(self):
        assert stem("is") == "is"


class TestLoadJsonl(object):
    def test_valid_line(self, tmp_path):
        path = tmp_path / "in.jsonl"
        path.write_text(json.dumps({
            "post_id": "p1", "comment_id": "c1",
            "created_time": "2018-02-14T10:00:00Z", "message": "hi",
        }) + "\n")
        comments, errors = load_jsonl(path)
        assert len(comments) == 1 and not errors
        assert comments[0].post_id == "p1"
        assert comments[0].created_time == parse_timestamp("2018-02-14T10:00:00Z")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "in.jsonl"
        path.write_text("")
        comments, errors = load_jsonl(path)
        assert comments == [] and errors == []

    def test_malformed_line_skipped_with_lineno(self, tmp_path):
        path = tmp_path / "in.jsonl"
        good = json.dumps({
            "post_id": "p1", "comment_id": "c1",
            "created_time": "2018-02-14T10:00:00Z", "message": "hi",
        })
        path.write_text(good + "\n{not json}\n")
        comments, errors = load_jsonl(path)
        assert len(comments) == 1
        assert len(errors) == 1 and errors[0].lineno == 2

    def test_naive_timestamp_assumed_utc(self):
        dt = parse_timestamp("2018-02-14T10:00:00")
        assert dt.utcoffset().total_seconds() == 0


class TestPreprocess:
    def _raw(self, text):
        return RawComment("p1", "c1", parse_timestamp("2018-02-14T10:00:00Z"), text)

    def test_url_only_dropped(self):
        assert preprocess.preprocess(self._raw("https://a.b/c")) is None

    def test_empty_dropped(self):
        assert preprocess.preprocess(self._raw("")) is None

    def test_elongated_with_emoji(self):
        clean = preprocess.preprocess(self._raw("haaappy 🙂"))
        assert clean.tokens == ["happi", "🙂"]
        assert clean.emojis == ["🙂"]

    def test_flag_lists_match_token_count(self):
        clean = preprocess.preprocess(self._raw("GREAT stuff! really 🙂"))
        n = len(clean.tokens)
        assert len(clean.caps_flags) == n and len(clean.exclaim_flags) == n

    def test_build_corpus_counts(self):
        raws = [self._raw("hello there"), self._raw("https://x.co"), self._raw("ok")]
        corpus = build_corpus(raws)
        assert corpus.loaded == 3 and corpus.kept == 2 and corpus.dropped == 1

    def test_deterministic(self):
        a = preprocess.preprocess(self._raw("Some TEXT here! 🙂"))
        b = preprocess.preprocess(self._raw("Some TEXT here! 🙂"))
        assert a == b

    def test_clean_jsonl_round_trip(self, tmp_path):
        clean = preprocess.preprocess(self._raw("GREAT daaay today! 🙂"))
        path = tmp_path / "clean.jsonl"
        save_clean_jsonl([clean], path)
        assert load_clean_jsonl(path) == [clean]
