"""Tweet archive ingestion: parse JSON Lines, filter by study hashtag, dedup, partition.

The live collection step is replaced by replaying archived JSONL files.  Each
input line is one tweet object with at least ``id``, ``created_at`` and
``text``; ``extended_tweet.full_text`` and ``user.location`` are optional.

Admitted tweets are written back out in a canonical JSONL form (fixed key
order, UTF-8, no ASCII escaping) so downstream stages can be diffed byte for
byte.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator

from .charclass import is_basic_latin_letter, is_cjk, is_letter, is_word_char
from .errors import BadTimestamp, DataFileError, MalformedJson, MissingField, ParseError

TWITTER_TIME_FORMAT = "%a %b %d %H:%M:%S +0000 %Y"
ISO_FORMAT = "%Y-%m-%dT%H:%M:%SZ"
MAX_TWEET_ID = 2**64 - 1


class Language(str, Enum):
    ENGLISH = "en"
    CHINESE = "zh"
    OTHER = "other"


@dataclass(frozen=True)
class HashtagSet:
    """Ordered study hashtags.  ``scripts[i]`` names the block tag ``i`` came from."""

    tags: tuple[str, ...]
    scripts: tuple[str, ...]

    def __post_init__(self):
        if len(self.tags) != len(self.scripts):
            raise ValueError("tags and scripts must align")
        # body -> tag, for O(1) lookup of a scanned hashtag token
        object.__setattr__(self, "_by_body", {t[1:]: t for t in self.tags})

    def __len__(self) -> int:
        return len(self.tags)

    def __contains__(self, tag: str) -> bool:
        return tag in self.tags

    def count_by_script(self) -> dict[str, int]:
        return dict(Counter(self.scripts))

    def lookup_body(self, body: str) -> str | None:
        return self._by_body.get(body)

    @classmethod
    def load(cls, path: str | Path) -> "HashtagSet":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def parse(cls, text: str) -> "HashtagSet":
        """One tag per line.  ``[name]`` lines open a script block; blank lines are skipped."""
        tags: list[str] = []
        scripts: list[str] = []
        current = "unspecified"
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip()
                continue
            if not line.startswith("#") or len(line) < 2:
                raise DataFileError(f"hashtag file line {lineno}: {line!r} is not a #tag")
            body = line[1:]
            if not all(is_word_char(c) for c in body):
                raise DataFileError(f"hashtag file line {lineno}: {line!r} has boundary characters")
            tags.append(line)
            scripts.append(current)
        return cls(tuple(tags), tuple(scripts))

    @classmethod
    def default(cls) -> "HashtagSet":
        return cls.parse(resources.files("tweetcascade.data").joinpath("hashtags.txt").read_text("utf-8"))


@dataclass
class RawTweet:
    id: int
    created_at: datetime
    text: str
    user_location: str | None = None
    matched_hashtags: tuple[str, ...] = ()
    language: Language | None = None
    source_lang: str | None = None

    def to_json(self) -> str:
        record = {
            "id": self.id,
            "created_at": self.created_at.strftime(ISO_FORMAT),
            "text": self.text,
            "user_location": self.user_location,
            "matched_hashtags": list(self.matched_hashtags),
            "language": self.language.value if self.language else None,
        }
        return json.dumps(record, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "RawTweet":
        d = json.loads(line)
        return cls(
            id=int(d["id"]),
            created_at=datetime.strptime(d["created_at"], ISO_FORMAT).replace(tzinfo=timezone.utc),
            text=d["text"],
            user_location=d.get("user_location"),
            matched_hashtags=tuple(d.get("matched_hashtags") or ()),
            language=Language(d["language"]) if d.get("language") else None,
        )


@dataclass
class IngestStats:
    total_lines: int = 0
    parsed: int = 0
    admitted: int = 0
    duplicates: int = 0
    rejected: int = 0  # parsed but carrying no study hashtag
    parse_errors: int = 0
    per_language: dict[str, int] = field(default_factory=lambda: {lang.value: 0 for lang in Language})
    error_kinds: dict[str, int] = field(default_factory=dict)

    def check(self) -> None:
        assert self.admitted == sum(self.per_language.values())
        assert self.admitted + self.duplicates + self.rejected + self.parse_errors == self.total_lines

    def to_dict(self) -> dict:
        return {
            "total_lines": self.total_lines,
            "parsed": self.parsed,
            "admitted": self.admitted,
            "duplicates": self.duplicates,
            "rejected_by_hashtag": self.rejected,
            "parse_errors": self.parse_errors,
            "per_language": dict(self.per_language),
            "error_kinds": dict(sorted(self.error_kinds.items())),
        }


def parse_timestamp(value: str) -> datetime:
    try:
        dt = datetime.strptime(value, TWITTER_TIME_FORMAT)
    except (TypeError, ValueError) as exc:
        raise BadTimestamp(repr(value)) from exc
    # strptime tolerates unpadded days and ignores the weekday; the round trip does not
    if dt.strftime(TWITTER_TIME_FORMAT) != value:
        raise BadTimestamp(repr(value))
    return dt.replace(tzinfo=timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime(TWITTER_TIME_FORMAT)


def _parse_id(value) -> int:
    if isinstance(value, bool):
        raise MalformedJson(f"id {value!r} is not an integer")
    if isinstance(value, int):
        tid = value
    elif isinstance(value, str) and value.isascii() and value.isdigit():
        tid = int(value)
    else:
        raise MalformedJson(f"id {value!r} is not an integer")
    if not 0 <= tid <= MAX_TWEET_ID:
        raise MalformedJson(f"id {tid} outside the unsigned 64-bit range")
    return tid


def parse_tweet_record(line: str) -> RawTweet:
    """Parse one archive line into a RawTweet with no language or hashtags yet."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedJson(str(exc)) from exc
    if not isinstance(obj, dict):
        raise MalformedJson("record is not a JSON object")

    for name in ("id", "created_at", "text"):
        if name not in obj or obj[name] is None:
            raise MissingField(name)
    tid = _parse_id(obj["id"])
    created = parse_timestamp(obj["created_at"])

    text = obj["text"]
    ext = obj.get("extended_tweet")
    if isinstance(ext, dict) and isinstance(ext.get("full_text"), str):
        text = ext["full_text"]
    if not isinstance(text, str):
        raise MalformedJson("text is not a string")

    location = None
    user = obj.get("user")
    if isinstance(user, dict) and isinstance(user.get("location"), str):
        location = user["location"]

    source_lang = obj.get("lang") if isinstance(obj.get("lang"), str) else None
    return RawTweet(id=tid, created_at=created, text=text, user_location=location, source_lang=source_lang)


def match_hashtags(text: str, tags: HashtagSet) -> list[str]:
    """Study tags occurring in ``text`` as complete hashtag tokens, in order of first appearance.

    Matching is case-sensitive.  A tag matches when ``#`` is followed by its
    body and then by end of text or a boundary character.
    """
    found: list[str] = []
    n = len(text)
    i = text.find("#")
    while i != -1:
        j = i + 1
        while j < n and is_word_char(text[j]):
            j += 1
        if j > i + 1:
            tag = tags.lookup_body(text[i + 1:j])
            if tag is not None and tag not in found:
                found.append(tag)
        i = text.find("#", i + 1)
    return found


_URL_RE = re.compile(r"https?://\S+")
_MENTION_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#\w+")


@dataclass(frozen=True)
class LanguageRules:
    cjk_threshold: float = 0.30
    latin_threshold: float = 0.80
    use_lang_field: bool = False


def partition_language(tweet: RawTweet | str, rules: LanguageRules = LanguageRules()) -> Language:
    """Assign English / Chinese / Other from letter-class character ratios.

    URLs, mentions and whole hashtags are removed first.  With
    ``use_lang_field`` the upstream ``lang`` attribute only settles tweets the
    ratios would otherwise call Other.
    """
    text = tweet if isinstance(tweet, str) else tweet.text
    text = _HASHTAG_RE.sub(" ", _MENTION_RE.sub(" ", _URL_RE.sub(" ", text)))
    letters = cjk = latin = 0
    for ch in text:
        if is_cjk(ch):
            cjk += 1
            letters += 1
        elif is_letter(ch):
            letters += 1
            if is_basic_latin_letter(ch):
                latin += 1
    result = Language.OTHER
    if letters:
        cjk_ratio = cjk / letters
        if cjk_ratio >= rules.cjk_threshold:
            result = Language.CHINESE
        elif latin / letters >= rules.latin_threshold:
            result = Language.ENGLISH
    if result is Language.OTHER and rules.use_lang_field and not isinstance(tweet, str):
        hint = (tweet.source_lang or "").lower()
        if hint == "en":
            result = Language.ENGLISH
        elif hint.startswith("zh"):
            result = Language.CHINESE
    return result


def ingest_stream(
    lines: Iterable[str],
    tags: HashtagSet,
    rules: LanguageRules = LanguageRules(),
) -> tuple[list[RawTweet], IngestStats]:
    """Fold archive lines into an ordered, deduplicated corpus.

    Whitespace-only lines are skipped and not counted.  Per-record failures
    are tallied in ``parse_errors`` (by error name in ``error_kinds``).
    """
    stats = IngestStats()
    seen: set[int] = set()
    corpus: list[RawTweet] = []
    for line in lines:
        if not line.strip():
            continue
        stats.total_lines += 1
        try:
            tweet = parse_tweet_record(line)
        except ParseError as exc:
            stats.parse_errors += 1
            stats.error_kinds[exc.name] = stats.error_kinds.get(exc.name, 0) + 1
            continue
        stats.parsed += 1
        matched = match_hashtags(tweet.text, tags)
        if not matched:
            stats.rejected += 1
            continue
        if tweet.id in seen:
            stats.duplicates += 1
            continue
        seen.add(tweet.id)
        tweet.matched_hashtags = tuple(matched)
        tweet.language = partition_language(tweet, rules)
        stats.per_language[tweet.language.value] += 1
        stats.admitted += 1
        corpus.append(tweet)
    return corpus, stats


def write_corpus(tweets: Iterable[RawTweet], fh: IO[str]) -> None:
    for t in tweets:
        fh.write(t.to_json())
        fh.write("\n")


def iter_corpus(path: str | Path) -> Iterator[RawTweet]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield RawTweet.from_json(line)


def read_corpus(path: str | Path) -> list[RawTweet]:
    return list(iter_corpus(path))
