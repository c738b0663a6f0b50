"""Synthetic tweet archives and labeler panels with known ground truth.

Class-indicative words come from disjoint vocabularies drawn from the
shipped lexicons; every tweet also gets neutral filler.  The generator is a
pure function of its seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Iterator

import numpy as np

from .annotation import Ballot, GoldLabel
from .ingest import TWITTER_TIME_FORMAT, HashtagSet, Language
from .labels import FinalLabel, Polarity, Typeface
from .text import Lexicon, TypefaceTable, data_path

EN_FILLER = (
    "today people city watch time video news world year day street look see show big new "
    "first morning evening night live stream tv coverage square crowd photo photos pic "
    "everyone here there right now week road building tower event events moment"
).split()
EN_FACTUAL = (
    "starts begins scheduled schedule broadcast report reports reported announced announcement "
    "officials ministry statement press conference route closed roads station airport "
    "minutes hours 10am noon timeline update updates details official"
).split()
ZH_FILLER = list("今天大家城市时间视频新闻世界早上晚上现场直播电视广场人群照片图片这里那里现在一周道路大楼活动")
ZH_FACTUAL = "开始 举行 安排 报道 宣布 公告 官方 部门 发布会 路线 地铁 车站 机场 分钟 小时 上午 中午 时间表 更新 细节".split()
OTHER_TEXTS = (
    "С днём рождения, Китай", "Поздравляем с национальным праздником", "중국 국경절 축하합니다",
    "국경절 퍼레이드 생중계", "عيد وطني سعيد للصين", "สุขสันต์วันชาติจีน",
)
LOCATIONS = (
    "Lahore, Pakistan", "Karachi", "Islamabad, Pakistan", "New York, NY", "Los Angeles, CA", "USA",
    "London, England", "United Kingdom", "Hong Kong", "Beijing, China", "Shanghai", "台北", "香港",
    "北京", "Sydney, Australia", "Melbourne", "Toronto, Canada", "Vancouver", "Tokyo, Japan",
    "Kampala, Uganda", "Istanbul, Turkey", "Berlin, Germany", "Paris, France", "Moscow", "Bangkok",
    "New Delhi, India", "Mumbai", "Singapore", "Phnom Penh", "Warsaw, Poland", "Caracas",
    "Tegucigalpa, Honduras", "", "", "", "Earth", "somewhere", "the moon", "🌏",
)
IRRELEVANT_TAGS_EN = ("#NationalDay", "#NationalDay2019", "#70thAnniversary", "#Chinese")
IRRELEVANT_TAGS_ZH = {"simplified": ("#70周年", "#七十周年"), "traditional": ("#70週年", "#七十週年")}
START = datetime(2019, 9, 29, 16, 0, tzinfo=timezone.utc)
SPAN_HOURS = 74


def _single_token_terms(lex: Lexicon, side: str) -> list[str]:
    terms = sorted(getattr(lex, side))
    if lex.language is Language.CHINESE:
        return [t for t in terms if 1 <= len(t) <= 4]
    return [t for t in terms if " " not in t and "'" not in t and "-" not in t]


@dataclass
class Truth:
    relevant: bool
    polarity: Polarity | None
    typeface: Typeface | None
    language: Language


@dataclass
class Vocab:
    pos: list[str]
    neg: list[str]
    topic: list[str]
    offtopic: list[str]
    filler: list[str]
    factual: list[str]


def _load_vocab(lang: Language, table: TypefaceTable) -> Vocab:
    suffix = lang.value
    pol = Lexicon.load(data_path(f"lexicon_{suffix}.txt"), lang)
    rel = Lexicon.load(data_path(f"relevance_{suffix}.txt"), lang)
    if lang is Language.CHINESE:
        # simplified-only vocabulary; traditional tweets are converted afterwards
        def simp(ws):
            return [w for w in ws if table.to_simplified(w) == w]
    else:
        def simp(ws):
            return ws
    pos = simp(_single_token_terms(pol, "positive"))
    neg = simp(_single_token_terms(pol, "negative"))
    topic = simp(_single_token_terms(rel, "positive"))
    off = simp(_single_token_terms(rel, "negative"))
    used = set(pos) | set(neg) | set(topic) | set(off)
    filler = [w for w in (ZH_FILLER if lang is Language.CHINESE else EN_FILLER) if w not in used]
    factual = [w for w in (ZH_FACTUAL if lang is Language.CHINESE else EN_FACTUAL) if w not in used]
    return Vocab(pos, neg, topic, off, filler, factual)


class TweetSynth:
    """Draws tweets with known truth.  ``p_*`` control the class mix."""

    def __init__(self, seed: int = 0, *, p_chinese: float = 0.15, p_other: float = 0.04,
                 p_relevant: float = 0.8, p_traditional: float = 0.3,
                 polarity_mix: tuple[float, float, float] = (0.5, 0.25, 0.25)):
        self.rng = np.random.default_rng(seed)
        self.table = TypefaceTable.load(data_path("typeface_map.tsv"))
        self.tags = HashtagSet.default()
        self.vocab = {lang: _load_vocab(lang, self.table) for lang in (Language.ENGLISH, Language.CHINESE)}
        self.p_chinese, self.p_other = p_chinese, p_other
        self.p_relevant, self.p_traditional = p_relevant, p_traditional
        self.polarity_mix = polarity_mix
        self._tags_by_script = {}
        for t, s in zip(self.tags.tags, self.tags.scripts):
            self._tags_by_script.setdefault(s, []).append(t)

    def _pick(self, seq, k: int = 1) -> list:
        return [seq[i] for i in self.rng.integers(0, len(seq), size=k)]

    def draw_truth(self, lang: Language | None = None) -> Truth:
        r = self.rng.random()
        if lang is None:
            lang = Language.CHINESE if r < self.p_chinese else (
                Language.OTHER if r < self.p_chinese + self.p_other else Language.ENGLISH)
        if lang is Language.OTHER:
            return Truth(False, None, None, lang)
        relevant = bool(self.rng.random() < self.p_relevant)
        polarity = None
        if relevant:
            polarity = [Polarity.POSITIVE, Polarity.NEUTRAL, Polarity.NEGATIVE][
                int(self.rng.choice(3, p=self.polarity_mix))]
        typeface = None
        if lang is Language.CHINESE:
            typeface = Typeface.TRADITIONAL if self.rng.random() < self.p_traditional else Typeface.SIMPLIFIED
        return Truth(relevant, polarity, typeface, lang)

    def text_for(self, truth: Truth) -> str:
        if truth.language is Language.OTHER:
            return self._pick(OTHER_TEXTS)[0] + " " + self._pick(self._tags_by_script["english"])[0]
        v = self.vocab[truth.language]
        rng = self.rng
        words = self._pick(v.filler, int(rng.integers(3, 8)))
        if truth.relevant:
            words += self._pick(v.topic, int(rng.integers(1, 3)))
        else:
            words += self._pick(v.offtopic, int(rng.integers(1, 3)))
        pol = truth.polarity
        if not truth.relevant and rng.random() < 0.4:
            pol = Polarity.POSITIVE if rng.random() < 0.5 else Polarity.NEGATIVE
        if pol is Polarity.POSITIVE:
            words += self._pick(v.pos, int(rng.integers(1, 4)))
        elif pol is Polarity.NEGATIVE:
            words += self._pick(v.neg, int(rng.integers(1, 4)))
        else:
            words += self._pick(v.factual, int(rng.integers(1, 3)))
        rng.shuffle(words)

        if truth.language is Language.CHINESE:
            body = "".join(words)
            if rng.random() < 0.3:
                body += "70周年"
            script = "simplified"
            if truth.typeface is Typeface.TRADITIONAL:
                body = self.table.to_traditional(body)
                script = "traditional"
            pool = self._tags_by_script[script] if truth.relevant else list(IRRELEVANT_TAGS_ZH[script])
            tags = self._pick(pool, int(rng.integers(1, 3)))
            parts = [" ".join(dict.fromkeys(tags)), body]
        else:
            body = " ".join(words)
            body = body[0].upper() + body[1:] + "."
            pool = self._tags_by_script["english"] if truth.relevant else list(IRRELEVANT_TAGS_EN)
            tags = self._pick(pool, int(rng.integers(1, 3)))
            parts = [body, " ".join(dict.fromkeys(tags))]
        if rng.random() < 0.15:
            parts.insert(0, f"RT @user{int(rng.integers(1, 999))}:")
        if rng.random() < 0.2:
            parts.append(f"https://t.co/{int(rng.integers(10**6, 10**7))}")
        return " ".join(parts)

    def record(self, tweet_id: int, truth: Truth) -> dict:
        ts = START + timedelta(seconds=int(self.rng.integers(0, SPAN_HOURS * 3600)))
        return {
            "id": tweet_id,
            "created_at": ts.strftime(TWITTER_TIME_FORMAT),
            "text": self.text_for(truth),
            "user": {"location": self._pick(LOCATIONS)[0]},
        }


def synth_archive(n: int, seed: int = 0, *, noise_lines: bool = True, **mix) -> tuple[list[str], dict[int, Truth]]:
    """``n`` tweet lines plus, optionally, a few duplicates, off-topic and malformed lines."""
    gen = TweetSynth(seed, **mix)
    lines: list[str] = []
    truth: dict[int, Truth] = {}
    base_id = 1_178_000_000_000_000_000
    for k in range(n):
        tid = base_id + k * 7919
        t = gen.draw_truth()
        truth[tid] = t
        lines.append(json.dumps(gen.record(tid, t), ensure_ascii=False))
    if noise_lines and n >= 20:
        rng = gen.rng
        for _ in range(max(1, n // 100)):
            lines.insert(int(rng.integers(0, len(lines))), lines[int(rng.integers(0, len(lines)))])
        for j in range(max(1, n // 200)):
            lines.insert(int(rng.integers(0, len(lines))), json.dumps(
                {"id": base_id - 1 - j, "created_at": "Tue Oct 01 12:00:00 +0000 2019",
                 "text": "Lovely weather for a walk #weekend", "user": {"location": "Paris"}}))
        lines.insert(int(rng.integers(0, len(lines))), '{"id": 5, "text": "no timestamp #China"}')
        lines.insert(int(rng.integers(0, len(lines))), '{"id": 6, "created_at": "yesterday", "text": "#China"}')
        lines.insert(int(rng.integers(0, len(lines))), '{not json')
    return lines, truth


def iter_archive(n: int, seed: int = 0, **mix) -> Iterator[str]:
    """Streaming variant without noise lines, for large throughput runs."""
    gen = TweetSynth(seed, **mix)
    base_id = 1_178_000_000_000_000_000
    for k in range(n):
        yield json.dumps(gen.record(base_id + k, gen.draw_truth()), ensure_ascii=False)


def _score_for(polarity: Polarity, rng: np.random.Generator) -> int:
    if polarity is Polarity.POSITIVE:
        return int(rng.integers(1, 3))
    if polarity is Polarity.NEGATIVE:
        return -int(rng.integers(1, 3))
    return 0


def synth_ballots(
    truth: dict[int, Truth],
    ids: list[int],
    seed: int = 0,
    labelers: tuple[int, ...] = (1, 2, 3, 4),
    p_relevance_error: float = 0.04,
    p_score_error: float = 0.12,
    p_typeface_error: float = 0.02,
) -> list[Ballot]:
    """Independent noisy judgments of the true labels by each labeler."""
    rng = np.random.default_rng(seed)
    ballots = []
    for tid in ids:
        t = truth[tid]
        for lab in labelers:
            relevant = t.relevant if rng.random() >= p_relevance_error else not t.relevant
            score = None
            if relevant:
                if t.polarity is None or rng.random() < p_score_error:
                    score = int(rng.integers(-2, 3))
                else:
                    score = _score_for(t.polarity, rng)
            typeface = None
            if t.typeface is not None:
                typeface = t.typeface
                if rng.random() < p_typeface_error:
                    typeface = Typeface.TRADITIONAL if typeface is Typeface.SIMPLIFIED else Typeface.SIMPLIFIED
            ballots.append(Ballot(tid, lab, relevant, score, typeface))
    return ballots


def gold_from_truth(truth: dict[int, Truth]) -> dict[int, GoldLabel]:
    """Gold labels that equal the generator's truth (unanimous ratios, no ties)."""
    gold = {}
    for tid, t in truth.items():
        if t.language is Language.OTHER:
            continue
        gold[tid] = GoldLabel(tid, t.relevant, t.polarity, t.typeface, "4:0",
                              "4:0" if t.relevant else "", "4:0" if t.typeface else "", False)
    return gold


_FINALS = (FinalLabel.IRRELEVANT, FinalLabel.NEUTRAL, FinalLabel.POSITIVE, FinalLabel.NEGATIVE)
_POLARITY_OF = {FinalLabel.NEUTRAL: Polarity.NEUTRAL, FinalLabel.POSITIVE: Polarity.POSITIVE,
                FinalLabel.NEGATIVE: Polarity.NEGATIVE}


def corrupt_gold(gold: dict[int, GoldLabel], rate: float, seed: int = 0) -> dict[int, GoldLabel]:
    """With probability ``rate`` per tweet, replace its final class by a different one drawn
    uniformly; typefaces are flipped independently with the same probability."""
    rng = np.random.default_rng(seed)
    out = {}
    for tid in sorted(gold):
        g = gold[tid]
        final = FinalLabel.IRRELEVANT if not g.relevant else FinalLabel(g.polarity.value)
        if rng.random() < rate:
            others = [f for f in _FINALS if f is not final]
            final = others[int(rng.integers(len(others)))]
        face = g.typeface
        if face is not None and rng.random() < rate:
            face = Typeface.TRADITIONAL if face is Typeface.SIMPLIFIED else Typeface.SIMPLIFIED
        relevant = final is not FinalLabel.IRRELEVANT
        out[tid] = GoldLabel(tid, relevant, _POLARITY_OF.get(final), face, g.relevance_ratio,
                             g.polarity_ratio if relevant else "", g.typeface_ratio, g.tie_broken)
    return out
