"""Hourly sentiment series, per-country sentiment and word-frequency reports."""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

from .errors import DataFileError, EmptyCorpus, UnknownClass
from .ingest import ISO_FORMAT, Language, RawTweet
from .labels import FinalLabel, Polarity, Typeface
from .text import StopList, TokenizedDoc

SERIES_HEADER = ("bucket_start_beijing", "positive", "negative", "neutral", "absolute", "pos_pct", "neg_pct", "diff_pct")
COUNTRY_HEADER = ("country", "positive", "negative", "score", "undefined_ratio")
WORDS_HEADER = ("class", "rank", "token", "count")
BUCKET_FORMAT = "%Y-%m-%d %H:%M"
_HOUR = timedelta(hours=1)


@dataclass
class ClassifiedTweet:
    """A corpus record with its cascade outcome, as written by ``classify``."""

    id: int
    created_at: datetime
    language: Language
    text: str
    user_location: str | None
    final: FinalLabel
    typeface: Typeface | None = None

    @classmethod
    def from_outcome(cls, tweet: RawTweet, outcome) -> "ClassifiedTweet":
        return cls(tweet.id, tweet.created_at, tweet.language, tweet.text, tweet.user_location,
                   outcome.final, outcome.typeface)

    def to_json(self) -> str:
        return json.dumps({
            "id": self.id,
            "created_at": self.created_at.strftime(ISO_FORMAT),
            "language": self.language.value,
            "final": self.final.value,
            "typeface": self.typeface.value if self.typeface else None,
            "user_location": self.user_location,
            "text": self.text,
        }, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "ClassifiedTweet":
        d = json.loads(line)
        return cls(
            int(d["id"]),
            datetime.strptime(d["created_at"], ISO_FORMAT).replace(tzinfo=timezone.utc),
            Language(d["language"]),
            d["text"],
            d.get("user_location"),
            FinalLabel(d["final"]),
            Typeface(d["typeface"]) if d.get("typeface") else None,
        )


def read_classified(path: str | Path) -> list[ClassifiedTweet]:
    with open(path, encoding="utf-8") as fh:
        return [ClassifiedTweet.from_json(line) for line in fh if line.strip()]


# --- hourly series -----------------------------------------------------------

@dataclass(frozen=True)
class TimeBucket:
    start: datetime  # naive wall-clock time at the configured offset
    positive: int = 0
    negative: int = 0
    neutral: int = 0

    @property
    def total_classified(self) -> int:
        return self.positive + self.negative + self.neutral

    @property
    def absolute(self) -> int:
        return self.positive - self.negative

    @property
    def pos_pct(self) -> float:
        return self.positive / self.total_classified if self.total_classified else 0.0

    @property
    def neg_pct(self) -> float:
        return self.negative / self.total_classified if self.total_classified else 0.0

    @property
    def diff_pct(self) -> float:
        return self.pos_pct - self.neg_pct


@dataclass(frozen=True)
class SentimentSeries:
    buckets: tuple[TimeBucket, ...]
    utc_offset_hours: float

    def totals(self) -> Counter:
        c = Counter()
        for b in self.buckets:
            c["positive"] += b.positive
            c["negative"] += b.negative
            c["neutral"] += b.neutral
        return c


def _bucket_start(ts: datetime, offset: timedelta) -> datetime:
    local = ts.astimezone(timezone.utc).replace(tzinfo=None) + offset
    return local.replace(minute=0, second=0, microsecond=0)


_FIELD = {FinalLabel.POSITIVE: "positive", FinalLabel.NEGATIVE: "negative", FinalLabel.NEUTRAL: "neutral"}


def hourly_counts(tweets: Iterable[ClassifiedTweet], utc_offset_hours: float = 8) -> dict[datetime, Counter]:
    """Per-bucket class counts.  Irrelevant tweets only extend the covered span.

    Results from disjoint shards merge by adding the Counters.
    """
    offset = timedelta(hours=utc_offset_hours)
    counts: dict[datetime, Counter] = {}
    for t in tweets:
        start = _bucket_start(t.created_at, offset)
        c = counts.setdefault(start, Counter())
        name = _FIELD.get(t.final)
        if name:
            c[name] += 1
    return counts


def merge_hourly(parts: Iterable[Mapping[datetime, Counter]]) -> dict[datetime, Counter]:
    merged: dict[datetime, Counter] = {}
    for part in parts:
        for k, c in part.items():
            merged.setdefault(k, Counter()).update(c)
    return merged


def series_from_counts(counts: Mapping[datetime, Counter], utc_offset_hours: float = 8) -> SentimentSeries:
    if not counts:
        raise EmptyCorpus("no tweets to bucket")
    first, last = min(counts), max(counts)
    buckets = []
    cur = first
    while cur <= last:
        c = counts.get(cur, Counter())
        buckets.append(TimeBucket(cur, c["positive"], c["negative"], c["neutral"]))
        cur += _HOUR
    return SentimentSeries(tuple(buckets), utc_offset_hours)


def bucket_hourly(tweets: Iterable[ClassifiedTweet], utc_offset_hours: float = 8) -> SentimentSeries:
    return series_from_counts(hourly_counts(tweets, utc_offset_hours), utc_offset_hours)


def write_series_csv(series: SentimentSeries, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SERIES_HEADER)
    for b in series.buckets:
        w.writerow([
            b.start.strftime(BUCKET_FORMAT), b.positive, b.negative, b.neutral, b.absolute,
            f"{b.pos_pct:.6f}", f"{b.neg_pct:.6f}", f"{b.diff_pct:.6f}",
        ])


# --- countries ---------------------------------------------------------------

def _is_alnum_ascii(ch: str) -> bool:
    return ch.isascii() and ch.isalnum()


@dataclass
class Gazetteer:
    entries: tuple[tuple[str, str], ...]  # (case-folded alias, canonical country)

    def __post_init__(self):
        self._cache: dict[str, str | None] = {}

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "Gazetteer":
        entries = []
        for alias, country in pairs:
            alias = " ".join(alias.casefold().split())
            country = country.strip()
            if not alias or not country:
                raise DataFileError(f"empty gazetteer cell in {(alias, country)!r}")
            entries.append((alias, country))
        return cls(tuple(entries))

    @classmethod
    def load(cls, path: str | Path) -> "Gazetteer":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != ("alias", "country"):
                raise DataFileError("gazetteer header must be alias,country")
            return cls.from_pairs((r["alias"], r["country"]) for r in reader)

    def countries(self) -> set[str]:
        return {c for _, c in self.entries}


def _occurs_bounded(alias: str, text: str) -> bool:
    start = text.find(alias)
    while start != -1:
        end = start + len(alias)
        left_ok = not _is_alnum_ascii(alias[0]) or start == 0 or not _is_alnum_ascii(text[start - 1])
        right_ok = not _is_alnum_ascii(alias[-1]) or end == len(text) or not _is_alnum_ascii(text[end])
        if left_ok and right_ok:
            return True
        start = text.find(alias, start + 1)
    return False


def resolve_country(location: str | None, gz: Gazetteer) -> str | None:
    """Country for a free-text location, or None when nothing matches.

    The longest matching alias wins; equal lengths go to the earlier entry.
    Latin aliases must sit on word boundaries so "india" does not match
    "indiana".
    """
    if not location:
        return None
    cached = gz._cache.get(location, ...)
    if cached is not ...:
        return cached
    text = " ".join(location.casefold().split())
    best: tuple[int, str] | None = None
    for alias, country in gz.entries:
        if (best is None or len(alias) > best[0]) and alias in text and _occurs_bounded(alias, text):
            best = (len(alias), country)
    result = best[1] if best else None
    if len(gz._cache) < 500_000:
        gz._cache[location] = result
    return result


@dataclass(frozen=True)
class CountrySentiment:
    country: str
    positive: int
    negative: int

    @property
    def undefined_ratio(self) -> bool:
        return self.negative == 0

    @property
    def score(self) -> float | None:
        return None if self.negative == 0 else self.positive / self.negative


def country_counts(items: Iterable[tuple[FinalLabel, str | None]]) -> dict[str | None, Counter]:
    """Positive/negative counts per resolved country (None = unknown).  Neutral and Irrelevant are skipped."""
    counts: dict[str | None, Counter] = {}
    for final, country in items:
        if final is FinalLabel.POSITIVE:
            counts.setdefault(country, Counter())["positive"] += 1
        elif final is FinalLabel.NEGATIVE:
            counts.setdefault(country, Counter())["negative"] += 1
    return counts


def country_scores(items: Iterable[tuple[FinalLabel, str | None]]) -> list[CountrySentiment]:
    counts = country_counts(items)
    return [
        CountrySentiment(c, counts[c]["positive"], counts[c]["negative"])
        for c in sorted(k for k in counts if k is not None)
    ]


def write_country_csv(rows: Sequence[CountrySentiment], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COUNTRY_HEADER)
    for r in rows:
        score = "" if r.score is None else format(r.score, ".6g")
        w.writerow([r.country, r.positive, r.negative, score, "true" if r.undefined_ratio else "false"])


# --- words -------------------------------------------------------------------

_WORD_CLASSES = {FinalLabel.POSITIVE, FinalLabel.NEGATIVE, Polarity.POSITIVE, Polarity.NEGATIVE}


def _class_name(cls) -> str:
    if cls not in _WORD_CLASSES:
        raise UnknownClass(f"{cls!r}: word reports cover Positive and Negative only")
    return cls.value


def ranked_words(docs: Iterable[tuple[FinalLabel, TokenizedDoc]], cls, stoplist: StopList) -> list[tuple[str, int]]:
    name = _class_name(cls)
    counts: Counter = Counter()
    for final, doc in docs:
        if final.value == name:
            counts.update(t for t in doc.tokens if t not in stoplist)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def top_k_words(
    docs: Iterable[tuple[FinalLabel, TokenizedDoc]], cls, stoplist: StopList, k: int = 10
) -> list[tuple[str, int]]:
    return ranked_words(docs, cls, stoplist)[:k]


def distinctive_words(
    pos: Sequence[tuple[str, int]], neg: Sequence[tuple[str, int]]
) -> tuple[list[tuple[str, int]], list[tuple[str, int]]]:
    shared = {t for t, _ in pos} & {t for t, _ in neg}
    return [kv for kv in pos if kv[0] not in shared], [kv for kv in neg if kv[0] not in shared]


@dataclass
class WordFreqReport:
    ranked: dict[str, list[tuple[str, int]]]
    distinctive: dict[str, list[tuple[str, int]]]

    @classmethod
    def build(cls, docs: Sequence[tuple[FinalLabel, TokenizedDoc]], stoplist: StopList) -> "WordFreqReport":
        pos = ranked_words(docs, FinalLabel.POSITIVE, stoplist)
        neg = ranked_words(docs, FinalLabel.NEGATIVE, stoplist)
        dpos, dneg = distinctive_words(pos, neg)
        return cls({"Positive": pos, "Negative": neg}, {"Positive": dpos, "Negative": dneg})


def write_words_csv(lists: Mapping[str, Sequence[tuple[str, int]]], fh: IO[str], k: int | None = None) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(WORDS_HEADER)
    for name in ("Positive", "Negative"):
        for rank, (tok, n) in enumerate(lists.get(name, [])[:k], 1):
            w.writerow([name, rank, tok, n])
