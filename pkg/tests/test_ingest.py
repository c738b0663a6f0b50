from __future__ import annotations

import json
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings, strategies as st

from tweetcascade.charclass import is_cjk
from tweetcascade.errors import BadTimestamp, MalformedJson, MissingField
from tweetcascade.ingest import (
    HashtagSet, Language, LanguageRules, RawTweet, format_timestamp, ingest_stream, match_hashtags,
    parse_timestamp, parse_tweet_record, partition_language, read_corpus,
)
from conftest import SAMPLE

TAGS = HashtagSet.default()


def line(tid, text, created="Tue Oct 01 16:58:48 +0000 2019", location=""):
    return json.dumps({"id": tid, "created_at": created, "text": text, "user": {"location": location}},
                      ensure_ascii=False)


# --- parse_tweet_record ------------------------------------------------------

def test_parse_record_with_empty_location():
    t = parse_tweet_record(
        '{"id":1,"created_at":"Tue Oct 01 16:58:48 +0000 2019",'
        '"text":"@goofrider Big Congratulations to #China70years","user":{"location":""}}')
    assert t.id == 1
    assert t.created_at == datetime(2019, 10, 1, 16, 58, 48, tzinfo=timezone.utc)
    assert t.user_location == ""
    assert t.text == "@goofrider Big Congratulations to #China70years"


def test_parse_record_location_pass_through():
    t = parse_tweet_record('{"id":2,"created_at":"Mon Sep 30 18:19:59 +0000 2019","text":"…",'
                           '"user":{"location":"Lahore, Pakistan"}}')
    assert t.user_location == "Lahore, Pakistan"


def test_parse_record_missing_timestamp():
    with pytest.raises(MissingField) as exc:
        parse_tweet_record('{"id":3,"text":"no timestamp"}')
    assert exc.value.field == "created_at"


def test_parse_record_prefers_extended_text():
    t = parse_tweet_record(json.dumps({
        "id": "42", "created_at": "Tue Oct 01 16:58:48 +0000 2019", "text": "short…",
        "extended_tweet": {"full_text": "the whole thing #China"}}))
    assert t.id == 42 and t.text == "the whole thing #China" and t.user_location is None


@pytest.mark.parametrize("bad, err", [
    ("{not json", MalformedJson),
    ("[1, 2]", MalformedJson),
    ('{"id": -1, "created_at": "Tue Oct 01 16:58:48 +0000 2019", "text": "x"}', MalformedJson),
    ('{"id": 1, "created_at": "yesterday", "text": "x"}', BadTimestamp),
    ('{"id": 1, "created_at": "Tue Oct 01 16:58:48 +0800 2019", "text": "x"}', BadTimestamp),
    ('{"created_at": "Tue Oct 01 16:58:48 +0000 2019", "text": "x"}', MissingField),
])
def test_parse_record_errors(bad, err):
    with pytest.raises(err):
        parse_tweet_record(bad)


@given(st.datetimes(min_value=datetime(2006, 1, 1), max_value=datetime(2100, 1, 1)))
def test_timestamp_round_trip(dt):
    dt = dt.replace(microsecond=0, tzinfo=timezone.utc)
    s = format_timestamp(dt)
    assert parse_timestamp(s) == dt
    assert format_timestamp(parse_timestamp(s)) == s


# --- hashtag set and matching --------------------------------------------------

def test_hashtag_set_size_and_blocks():
    assert len(TAGS) == 59
    assert TAGS.count_by_script() == {"english": 29, "simplified": 15, "traditional": 15}


def test_match_in_text_order():
    text = "Happy 70th Anniversary to China. Best wishes from Pakistan. #China70years  #China"
    assert match_hashtags(text, TAGS) == ["#China70years", "#China"]


@pytest.mark.parametrize("text", ["#CHINA70YEARS is great", "#China70yearsOfProgress", "#France", "China70years",
                                  "#China_70", "#中国人"])
def test_match_rejects(text):
    assert match_hashtags(text, TAGS) == []


@pytest.mark.parametrize("text, expected", [
    ("#China!", ["#China"]),
    ("#china, #China", ["#china", "#China"]),
    ("#中国，加油", ["#中国"]),
    ("祝福#国庆70年 🎉", ["#国庆70年"]),
    ("#China #China", ["#China"]),
    ("end #prc70", ["#prc70"]),
])
def test_match_accepts(text, expected):
    assert match_hashtags(text, TAGS) == expected


def _boundary(ch: str) -> bool:
    return not (ch.isalnum() or ch == "_" or is_cjk(ch))


def brute_force_match(text: str, tags: HashtagSet) -> set[str]:
    found = set()
    for tag in tags.tags:
        start = 0
        while (i := text.find(tag, start)) != -1:
            end = i + len(tag)
            if end == len(text) or _boundary(text[end]):
                found.add(tag)
            start = i + 1
    return found


_alphabet = st.sampled_from(list("#ChinaPRC70yearsp中国庆阅兵 _!，.") + ["#China70years", "#中国", "#PRC70"])


@settings(max_examples=300)
@given(st.lists(_alphabet, max_size=12).map("".join))
def test_match_equals_brute_force_oracle(text):
    got = match_hashtags(text, TAGS)
    assert len(got) == len(set(got))
    assert set(got) == brute_force_match(text, TAGS)


@settings(max_examples=100)
@given(st.sampled_from(TAGS.tags), st.text(max_size=6))
def test_boundary_property(tag, suffix):
    text = f"x {tag}{suffix}"
    if tag in match_hashtags(text, TAGS):
        nxt = text[text.index(tag) + len(tag):][:1]
        assert nxt == "" or _boundary(nxt)


# --- language partition --------------------------------------------------------

@pytest.mark.parametrize("text, lang", [
    ("Happy 70th Anniversary to China.", Language.ENGLISH),
    ("#中国 #国庆节快乐 祝祖国母亲70周年生日快乐", Language.CHINESE),
    ("70 🎉🎉", Language.OTHER),
    ("С днём рождения, Китай #China", Language.OTHER),
    ("https://t.co/abc @someone #China 祝福", Language.CHINESE),
])
def test_partition_language(text, lang):
    assert partition_language(text) is lang


def test_partition_thresholds_are_configurable():
    mixed = "parade 国庆 celebration today everyone"  # 2 CJK of 30 letters
    assert partition_language(mixed) is Language.ENGLISH
    assert partition_language(mixed, LanguageRules(cjk_threshold=0.05)) is Language.CHINESE


def test_lang_field_only_breaks_ties():
    t = parse_tweet_record(json.dumps({"id": 1, "created_at": "Tue Oct 01 16:58:48 +0000 2019",
                                       "text": "70 🎉", "lang": "en"}))
    assert partition_language(t) is Language.OTHER
    assert partition_language(t, LanguageRules(use_lang_field=True)) is Language.ENGLISH
    t.text = "国庆快乐"
    assert partition_language(t, LanguageRules(use_lang_field=True)) is Language.CHINESE


# --- ingest_stream -------------------------------------------------------------

def test_ingest_counts_duplicates():
    lines = [line(i, f"tweet {i} #China") for i in range(5)] + [line(2, "again #China")]
    corpus, stats = ingest_stream(lines, TAGS)
    assert len(corpus) == 5 and stats.duplicates == 1
    assert corpus[2].text == "tweet 2 #China"  # first occurrence kept
    stats.check()


def test_ingest_rejects_tweet_without_study_hashtag():
    lines = [line(1, "a #China"), line(2, "no tag here #France"), line(3, "b #PLA")]
    corpus, stats = ingest_stream(lines, TAGS)
    assert [t.id for t in corpus] == [1, 3]
    assert stats.rejected == 1 and stats.admitted == 2
    stats.check()


def test_ingest_counts_parse_errors_and_skips_blank_lines():
    lines = [line(1, "a #China"), "", "   \n", "{oops", '{"id": 9, "text": "#China"}', line(2, "b #China", "bad")]
    corpus, stats = ingest_stream(lines, TAGS)
    assert stats.total_lines == 4 and stats.parse_errors == 3 and stats.admitted == 1
    assert stats.error_kinds == {"MalformedJson": 1, "MissingField": 1, "BadTimestamp": 1}
    stats.check()


def _oracle_admitted(lines: list[str]) -> int:
    """Independent recount: plain json + regex, no package helpers."""
    import re
    tags = set(TAGS.tags)
    seen, admitted = set(), 0
    for raw in lines:
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            datetime.strptime(obj["created_at"], "%a %b %d %H:%M:%S +0000 %Y")
            text = obj["text"]
            tid = int(obj["id"])
        except (ValueError, KeyError, TypeError):
            continue
        found = {m for m in re.findall(r"#[^\W]+", text) if m in tags}
        if not found or tid in seen:
            continue
        seen.add(tid)
        admitted += 1
    return admitted


def test_sample_archive_matches_oracle_recount():
    lines = (SAMPLE / "archive.jsonl").read_text(encoding="utf-8").splitlines()
    corpus, stats = ingest_stream(lines, TAGS)
    stats.check()
    assert stats.admitted == _oracle_admitted(lines)
    assert stats.duplicates > 0 and stats.parse_errors == 3 and stats.rejected > 0


def test_corpus_json_round_trip(tmp_path):
    from tweetcascade.ingest import write_corpus
    corpus, _ = ingest_stream([line(1, "a #China", location="Lahore"), line(2, "国庆 #中国")], TAGS)
    path = tmp_path / "c.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        write_corpus(corpus, fh)
    first = path.read_text(encoding="utf-8").splitlines()[0]
    assert list(json.loads(first)) == ["id", "created_at", "text", "user_location", "matched_hashtags", "language"]
    back = read_corpus(path)
    assert [t.to_json() for t in back] == [t.to_json() for t in corpus]


# --- properties ----------------------------------------------------------------

_texts = st.lists(st.sampled_from(["hello", "#China", "#china", "#中国", "国庆", "#France", "🎉", "70"]),
                  min_size=1, max_size=5).map(" ".join)
_records = st.lists(st.tuples(st.integers(0, 30), _texts), max_size=25)


@settings(max_examples=100)
@given(_records)
def test_idempotence_on_self_concatenation(records):
    lines = [line(i, t) for i, t in records]
    once, s1 = ingest_stream(lines, TAGS)
    twice, s2 = ingest_stream(lines + lines, TAGS)
    assert [t.to_json() for t in twice] == [t.to_json() for t in once]
    assert s2.duplicates == 2 * s1.duplicates + s1.admitted
    if s1.duplicates == 0:
        assert s2.duplicates == s2.admitted
    s2.check()


@settings(max_examples=100)
@given(_records)
def test_order_and_totality(records):
    lines = [line(i, t) for i, t in records]
    corpus, stats = ingest_stream(lines, TAGS)
    stats.check()
    expected, seen = [], set()
    for i, t in records:
        if match_hashtags(t, TAGS) and i not in seen:
            seen.add(i)
            expected.append(i)
    assert [t.id for t in corpus] == expected
    assert all(t.matched_hashtags and isinstance(t.language, Language) for t in corpus)


@settings(max_examples=50)
@given(_records, st.integers(1, 5))
def test_sharded_ingest_equals_sequential(records, shards):
    lines = [line(i, t) for i, t in records]
    whole, _ = ingest_stream(lines, TAGS)
    size = -(-len(lines) // shards) if lines else 1
    merged: list[RawTweet] = []
    seen: set[int] = set()
    for k in range(0, len(lines), size):
        part, _ = ingest_stream(lines[k:k + size], TAGS)
        for t in part:  # first occurrence wins in shard order
            if t.id not in seen:
                seen.add(t.id)
                merged.append(t)
    assert [t.to_json() for t in merged] == [t.to_json() for t in whole]
