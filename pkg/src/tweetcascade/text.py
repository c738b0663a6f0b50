"""Text normalization, tokenizers, typeface detection and lexicon scoring."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .charclass import is_cjk
from .errors import DataFileError, LanguageMismatch, NoCjkContent
from .ingest import Language
from .labels import Typeface

_URL_RE = re.compile(r"https?://\S+")
_RT_RE = re.compile(r"^\s*RT\b:?")
_MENTION_RE = re.compile(r"@[A-Za-z0-9_]+:?")
_HASH_RE = re.compile(r"#(?=\w)")
_EN_SPLIT_RE = re.compile(r"[^\w']+|_+")


def data_path(name: str) -> Path:
    return Path(str(resources.files("tweetcascade.data").joinpath(name)))


def strip_noise(text: str) -> str:
    """Drop URLs, a leading RT marker and @mentions; keep hashtag bodies; collapse whitespace."""
    text = _URL_RE.sub(" ", text)
    text = _RT_RE.sub("", text)
    text = _MENTION_RE.sub(" ", text)
    text = _HASH_RE.sub("", text)
    return " ".join(text.split())


@dataclass
class TokenizedDoc:
    tweet_id: int | None
    tokens: list[str]
    language: Language


def _english_tokens(text: str) -> list[str]:
    return [t for t in _EN_SPLIT_RE.split(text.lower()) if t]


def tokenize_english(text: str, tweet_id: int | None = None) -> TokenizedDoc:
    return TokenizedDoc(tweet_id, _english_tokens(text), Language.ENGLISH)


def tokenize_chinese(text: str, tweet_id: int | None = None) -> TokenizedDoc:
    """Character unigrams, then within-run bigrams, then lowercased non-CJK tokens."""
    unigrams: list[str] = []
    bigrams: list[str] = []
    other: list[str] = []
    prev_cjk = ""
    start = 0
    for i, ch in enumerate(text):
        if is_cjk(ch):
            if not prev_cjk and i > start:
                other.extend(_english_tokens(text[start:i]))
            unigrams.append(ch)
            if prev_cjk:
                bigrams.append(prev_cjk + ch)
            prev_cjk = ch
            start = i + 1
        else:
            prev_cjk = ""
    if start < len(text):
        other.extend(_english_tokens(text[start:]))
    return TokenizedDoc(tweet_id, unigrams + bigrams + other, Language.CHINESE)


def tokenize(text: str, language: Language, tweet_id: int | None = None, *, clean: bool = True) -> TokenizedDoc:
    if clean:
        text = strip_noise(text)
    if language is Language.CHINESE:
        return tokenize_chinese(text, tweet_id)
    return tokenize_english(text, tweet_id)


# --- lexicons ---------------------------------------------------------------

def _term_tokens(term: str, language: Language) -> tuple[str, ...]:
    if language is Language.CHINESE:
        if all(is_cjk(c) for c in term):
            if len(term) <= 2:
                return (term,)
            # longer terms match as a chain of overlapping bigram tokens
            return tuple(term[i:i + 2] for i in range(len(term) - 1))
        if any(is_cjk(c) for c in term):
            raise DataFileError(f"mixed-script lexicon term {term!r}")
    toks = tuple(_english_tokens(term))
    if not toks:
        raise DataFileError(f"lexicon term {term!r} has no tokens")
    return toks


class _PhraseIndex:
    """Counts occurrences of single- and multi-token terms in a token list."""

    def __init__(self, phrases: list[tuple[str, ...]]):
        self.single: set[str] = set()
        self.multi: dict[str, list[tuple[str, ...]]] = {}
        for p in phrases:
            if len(p) == 1:
                self.single.add(p[0])
            else:
                self.multi.setdefault(p[0], []).append(p)

    def count(self, tokens: list[str]) -> int:
        single, multi = self.single, self.multi
        n = 0
        if not multi:
            for t in tokens:
                if t in single:
                    n += 1
            return n
        for i, t in enumerate(tokens):
            if t in single:
                n += 1
            for p in multi.get(t, ()):
                if tuple(tokens[i:i + len(p)]) == p:
                    n += 1
        return n


@dataclass(frozen=True)
class Lexicon:
    language: Language
    positive: frozenset[str]
    negative: frozenset[str]
    _pos_index: _PhraseIndex = field(init=False, repr=False, compare=False)
    _neg_index: _PhraseIndex = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        overlap = self.positive & self.negative
        if overlap:
            raise DataFileError(f"terms in both polarities: {sorted(overlap)[:5]}")
        object.__setattr__(self, "_pos_index", _PhraseIndex([_term_tokens(t, self.language) for t in sorted(self.positive)]))
        object.__setattr__(self, "_neg_index", _PhraseIndex([_term_tokens(t, self.language) for t in sorted(self.negative)]))

    def counts(self, doc: TokenizedDoc) -> tuple[int, int]:
        if doc.language is not self.language:
            raise LanguageMismatch(f"{doc.language.value} doc scored with {self.language.value} lexicon")
        return self._pos_index.count(doc.tokens), self._neg_index.count(doc.tokens)

    def affect(self) -> "Lexicon":
        """All polarity terms as the positive side: evidence of any affect."""
        return Lexicon(self.language, self.positive | self.negative, frozenset())

    @classmethod
    def parse(cls, text: str, language: Language) -> "Lexicon":
        sections: dict[str, set[str]] = {"positive": set(), "negative": set()}
        current = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith(";"):
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip().lower()
                if current not in sections:
                    raise DataFileError(f"lexicon line {lineno}: unknown section {line}")
                continue
            if current is None:
                raise DataFileError(f"lexicon line {lineno}: term before any section")
            sections[current].add(" ".join(line.lower().split()))
        return cls(language, frozenset(sections["positive"]), frozenset(sections["negative"]))

    @classmethod
    def load(cls, path: str | Path, language: Language) -> "Lexicon":
        return cls.parse(Path(path).read_text(encoding="utf-8"), language)


def lexicon_net_score(doc: TokenizedDoc, lex: Lexicon) -> int:
    pos, neg = lex.counts(doc)
    return pos - neg


@dataclass(frozen=True)
class StopList:
    language: Language
    terms: frozenset[str]

    def __post_init__(self):
        if not self.terms:
            raise DataFileError(f"empty stoplist for {self.language.value}")

    def __contains__(self, token: str) -> bool:
        return token in self.terms

    @classmethod
    def load(cls, path: str | Path, language: Language) -> "StopList":
        terms = {ln.strip().lower() for ln in Path(path).read_text(encoding="utf-8").splitlines()}
        terms.discard("")
        return cls(language, frozenset(terms))


# --- typeface ---------------------------------------------------------------

@dataclass(frozen=True)
class TypefaceTable:
    simplified_only: frozenset[str]
    traditional_only: frozenset[str]
    to_traditional_map: dict[str, str] = field(default_factory=dict, compare=False, repr=False)
    to_simplified_map: dict[str, str] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.simplified_only & self.traditional_only:
            raise DataFileError("simplified-only and traditional-only sets overlap")

    @classmethod
    def load(cls, path: str | Path) -> "TypefaceTable":
        simp: set[str] = set()
        trad: set[str] = set()
        s2t: dict[str, str] = {}
        t2s: dict[str, str] = {}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not raw.strip() or raw.startswith("#"):
                continue
            parts = raw.split("\t")
            if len(parts) != 2 or len(parts[0]) != 1 or len(parts[1]) != 1:
                raise DataFileError(f"typeface table line {lineno}: expected 'simplified<TAB>traditional'")
            s, t = parts
            simp.add(s)
            trad.add(t)
            s2t.setdefault(s, t)
            t2s.setdefault(t, s)
        return cls(frozenset(simp - trad), frozenset(trad - simp), s2t, t2s)

    def to_traditional(self, text: str) -> str:
        return "".join(self.to_traditional_map.get(c, c) for c in text)

    def to_simplified(self, text: str) -> str:
        return "".join(self.to_simplified_map.get(c, c) for c in text)


def detect_typeface(text: str, table: TypefaceTable) -> Typeface:
    """Majority of script-distinctive characters; ties (including none) go to Simplified."""
    s = t = 0
    any_cjk = False
    for ch in text:
        if ch in table.simplified_only:
            s += 1
        elif ch in table.traditional_only:
            t += 1
        if not any_cjk and is_cjk(ch):
            any_cjk = True
    if not any_cjk:
        raise NoCjkContent(text[:40])
    return Typeface.TRADITIONAL if t > s else Typeface.SIMPLIFIED
