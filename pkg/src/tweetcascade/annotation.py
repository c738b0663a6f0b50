"""Labeler ballots, majority-vote amalgamation and agreement reports.

Each labeler judges relevance, a -2..+2 sentiment score (only when they
judged the tweet relevant) and, for Chinese tweets, the typeface.  Gold
labels are amalgamated per decision by plurality; ties among the leading
options are broken by a seeded uniform draw.  The draw's generator is keyed
by (seed, tweet_id, decision) so the outcome does not depend on ballot order,
tweet order or how the work is sharded.
"""

from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .errors import BallotFormatError, EmptyBallotSet, NoContestedVotes, NoParticipants, OutOfRange
from .labels import Polarity, Typeface

BALLOT_HEADER = ("tweet_id", "labeler_id", "relevant", "score", "typeface")
GOLD_HEADER = (
    "tweet_id", "relevant", "polarity", "typeface",
    "relevance_ratio", "polarity_ratio", "typeface_ratio", "tie_broken",
)

_DECISION_CODES = {"relevance": 1, "polarity": 2, "typeface": 3}


@dataclass(frozen=True)
class Ballot:
    tweet_id: int
    labeler_id: int
    relevant: bool
    score: int | None = None
    typeface: Typeface | None = None

    def __post_init__(self):
        if self.score is not None:
            if not self.relevant:
                raise BallotFormatError(f"tweet {self.tweet_id}, labeler {self.labeler_id}: score on an irrelevant ballot")
            if self.score not in (-2, -1, 0, 1, 2):
                raise OutOfRange(f"score {self.score}")


@dataclass(frozen=True)
class GoldLabel:
    tweet_id: int
    relevant: bool
    polarity: Polarity | None
    typeface: Typeface | None
    relevance_ratio: str
    polarity_ratio: str
    typeface_ratio: str
    tie_broken: bool


def collapse_score(score: int) -> Polarity:
    if score not in (-2, -1, 0, 1, 2):
        raise OutOfRange(f"score {score!r} outside -2..+2")
    if score > 0:
        return Polarity.POSITIVE
    if score < 0:
        return Polarity.NEGATIVE
    return Polarity.NEUTRAL


def ratio_descriptor(counts: Iterable[int]) -> str:
    """'3:1', '2:1:1', ...; a unanimous vote keeps an explicit ':0' ('4:0', '3:0')."""
    parts = sorted((c for c in counts if c > 0), reverse=True)
    if not parts:
        return ""
    if len(parts) == 1:
        parts.append(0)
    return ":".join(str(p) for p in parts)


def seeded_choice(candidates: Sequence, seed: int, tweet_id: int, decision: str):
    """Uniform pick from canonically ordered ``candidates``, reproducible per (seed, tweet, decision)."""
    rng = np.random.default_rng([seed, tweet_id, _DECISION_CODES[decision]])
    return candidates[int(rng.integers(len(candidates)))]


def _check_panel(ballots: Sequence[Ballot]) -> int:
    if not ballots:
        raise EmptyBallotSet("no ballots")
    tweet_ids = {b.tweet_id for b in ballots}
    if len(tweet_ids) != 1:
        raise BallotFormatError(f"ballots span several tweets: {sorted(tweet_ids)}")
    labelers = [b.labeler_id for b in ballots]
    if len(set(labelers)) != len(labelers):
        raise BallotFormatError(f"tweet {ballots[0].tweet_id}: repeated labeler id")
    return ballots[0].tweet_id


def _plurality(votes: list, order: Sequence, seed: int, tweet_id: int, decision: str):
    counts = Counter(votes)
    top = max(counts.values())
    leaders = [c for c in order if counts.get(c, 0) == top]
    ratio = ratio_descriptor(counts.values())
    if len(leaders) == 1:
        return leaders[0], ratio, False
    return seeded_choice(leaders, seed, tweet_id, decision), ratio, True


def amalgamate_relevance(ballots: Sequence[Ballot], seed: int = 0) -> tuple[bool, str, bool]:
    tweet_id = _check_panel(ballots)
    return _plurality([b.relevant for b in ballots], (True, False), seed, tweet_id, "relevance")


def amalgamate_polarity(
    ballots: Sequence[Ballot], relevance: bool, seed: int = 0
) -> tuple[Polarity | None, str, bool]:
    tweet_id = _check_panel(ballots)
    if not relevance:
        return None, "", False
    votes = [collapse_score(b.score) for b in ballots if b.relevant and b.score is not None]
    if not votes:
        raise NoParticipants(f"tweet {tweet_id} is relevant but no ballot carries a score")
    return _plurality(votes, list(Polarity), seed, tweet_id, "polarity")


def amalgamate_typeface(ballots: Sequence[Ballot], seed: int = 0) -> tuple[Typeface | None, str, bool]:
    tweet_id = _check_panel(ballots)
    votes = [b.typeface for b in ballots if b.typeface is not None]
    if not votes:
        return None, "", False
    return _plurality(votes, list(Typeface), seed, tweet_id, "typeface")


def amalgamate(ballots: Sequence[Ballot], seed: int = 0) -> GoldLabel:
    relevant, rel_ratio, rel_tie = amalgamate_relevance(ballots, seed)
    polarity, pol_ratio, pol_tie = amalgamate_polarity(ballots, relevant, seed)
    typeface, tf_ratio, tf_tie = amalgamate_typeface(ballots, seed)
    return GoldLabel(
        tweet_id=ballots[0].tweet_id,
        relevant=relevant,
        polarity=polarity,
        typeface=typeface,
        relevance_ratio=rel_ratio,
        polarity_ratio=pol_ratio,
        typeface_ratio=tf_ratio,
        tie_broken=rel_tie or pol_tie or tf_tie,
    )


def group_ballots(ballots: Iterable[Ballot]) -> dict[int, list[Ballot]]:
    """Group by tweet, first-seen tweet order, ballots sorted by labeler."""
    groups: dict[int, list[Ballot]] = {}
    for b in ballots:
        groups.setdefault(b.tweet_id, []).append(b)
    return {tid: sorted(bs, key=lambda b: b.labeler_id) for tid, bs in groups.items()}


def amalgamate_all(groups: Mapping[int, Sequence[Ballot]], seed: int = 0) -> list[GoldLabel]:
    return [amalgamate(groups[tid], seed) for tid in sorted(groups)]


# --- CSV I/O ----------------------------------------------------------------

_TRUE = {"true", "1", "yes", "y", "t"}
_FALSE = {"false", "0", "no", "n", "f"}


def _parse_bool(value: str, where: str) -> bool:
    v = value.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise BallotFormatError(f"{where}: {value!r} is not a boolean")


def parse_typeface(value: str) -> Typeface | None:
    v = value.strip().lower()
    if not v:
        return None
    if v in ("simplified", "s", "simp"):
        return Typeface.SIMPLIFIED
    if v in ("traditional", "t", "trad"):
        return Typeface.TRADITIONAL
    raise BallotFormatError(f"unknown typeface {value!r}")


def read_ballots(path: str | Path) -> list[Ballot]:
    ballots = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        if tuple(reader.fieldnames or ()) != BALLOT_HEADER:
            raise BallotFormatError(f"ballot header must be {','.join(BALLOT_HEADER)}")
        for n, row in enumerate(reader, 2):
            where = f"{path}:{n}"
            try:
                score = int(row["score"]) if row["score"].strip() else None
                ballots.append(Ballot(
                    tweet_id=int(row["tweet_id"]),
                    labeler_id=int(row["labeler_id"]),
                    relevant=_parse_bool(row["relevant"], where),
                    score=score,
                    typeface=parse_typeface(row["typeface"]),
                ))
            except ValueError as exc:
                raise BallotFormatError(f"{where}: {exc}") from exc
    return ballots


def ballot_row(b: Ballot) -> list[str]:
    return [
        str(b.tweet_id), str(b.labeler_id), "true" if b.relevant else "false",
        "" if b.score is None else str(b.score),
        b.typeface.value if b.typeface else "",
    ]


def write_ballots(ballots: Iterable[Ballot], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(BALLOT_HEADER)
    for b in ballots:
        w.writerow(ballot_row(b))


def write_gold(labels: Iterable[GoldLabel], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(GOLD_HEADER)
    for g in labels:
        w.writerow([
            g.tweet_id, "true" if g.relevant else "false",
            g.polarity.value if g.polarity else "",
            g.typeface.value if g.typeface else "",
            g.relevance_ratio, g.polarity_ratio, g.typeface_ratio,
            "true" if g.tie_broken else "false",
        ])


def read_gold(path: str | Path) -> dict[int, GoldLabel]:
    gold = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            tid = int(row["tweet_id"])
            gold[tid] = GoldLabel(
                tweet_id=tid,
                relevant=_parse_bool(row["relevant"], str(path)),
                polarity=Polarity(row["polarity"]) if row["polarity"] else None,
                typeface=Typeface(row["typeface"]) if row["typeface"] else None,
                relevance_ratio=row["relevance_ratio"],
                polarity_ratio=row["polarity_ratio"],
                typeface_ratio=row["typeface_ratio"],
                tie_broken=_parse_bool(row["tie_broken"], str(path)),
            )
    return gold


# --- agreement report -------------------------------------------------------

RATIO_COLUMNS = ("4:0", "3:1", "2:2", "2:1:1", "1:1:1:1")
OTHER_COLUMN = "other"
# three-participant votes share the columns of their four-participant analogues
_COLUMN_OF = {"4:0": "4:0", "3:1": "3:1", "2:2": "2:2", "2:1:1": "2:1:1", "1:1:1:1": "1:1:1:1",
              "3:0": "4:0", "2:1": "3:1", "1:1:1": "1:1:1:1"}

AGREEMENT_ROWS = (
    "relevance",
    "sentiment5|4:0", "sentiment5|3:1",
    "sentiment3|4:0", "sentiment3|3:1",
    "typeface",
)


def ratio_column(ratio: str) -> str:
    return _COLUMN_OF.get(ratio, OTHER_COLUMN)


@dataclass
class AgreementReport:
    rows: dict[str, Counter] = field(default_factory=lambda: {r: Counter() for r in AGREEMENT_ROWS})

    def row_total(self, row: str) -> int:
        return sum(self.rows[row].values())

    def merge(self, other: "AgreementReport") -> "AgreementReport":
        out = AgreementReport()
        for r in AGREEMENT_ROWS:
            out.rows[r] = self.rows[r] + other.rows[r]
        return out

    def to_dict(self) -> dict:
        cols = RATIO_COLUMNS + (OTHER_COLUMN,)
        return {r: {c: self.rows[r].get(c, 0) for c in cols} for r in AGREEMENT_ROWS}

    def format_table(self) -> str:
        cols = RATIO_COLUMNS + (OTHER_COLUMN,)
        width = max(len(r) for r in AGREEMENT_ROWS)
        lines = [" " * width + "".join(f"{c:>9}" for c in cols)]
        for r in AGREEMENT_ROWS:
            lines.append(f"{r:<{width}}" + "".join(f"{self.rows[r].get(c, 0):>9}" for c in cols))
        return "\n".join(lines)


def _relevance_condition(ballots: Sequence[Ballot], seed: int) -> str | None:
    """'4:0' / '3:1' when the relevant side won unanimously / with one dissent."""
    relevant, ratio, _ = amalgamate_relevance(ballots, seed)
    if not relevant:
        return None
    col = ratio_column(ratio)
    return col if col in ("4:0", "3:1") else None


def build_agreement_report(groups: Mapping[int, Sequence[Ballot]], seed: int = 0) -> AgreementReport:
    report = AgreementReport()
    for tid in sorted(groups):
        ballots = groups[tid]
        _, rel_ratio, _ = amalgamate_relevance(ballots, seed)
        report.rows["relevance"][ratio_column(rel_ratio)] += 1

        cond = _relevance_condition(ballots, seed)
        if cond is not None:
            scores = [b.score for b in ballots if b.relevant and b.score is not None]
            if scores:
                five = ratio_descriptor(Counter(scores).values())
                three = ratio_descriptor(Counter(collapse_score(s) for s in scores).values())
                report.rows[f"sentiment5|{cond}"][ratio_column(five)] += 1
                report.rows[f"sentiment3|{cond}"][ratio_column(three)] += 1

        faces = [b.typeface for b in ballots if b.typeface is not None]
        if faces:
            report.rows["typeface"][ratio_column(ratio_descriptor(Counter(faces).values()))] += 1
    return report


# --- dissident report -------------------------------------------------------

DISSENT_DECISIONS = ("relevance", "sentiment3|4:0", "sentiment3|3:1", "typeface")


@dataclass
class DissidentReport:
    labeler_id: int
    contested: dict[str, int]
    minority: dict[str, int]

    def ratio(self, decision: str) -> float | None:
        n = self.contested.get(decision, 0)
        return self.minority.get(decision, 0) / n if n else None

    @property
    def overall_ratio(self) -> float:
        total = sum(self.contested.values())
        return sum(self.minority.values()) / total

    def to_dict(self) -> dict:
        return {
            "labeler_id": self.labeler_id,
            "decisions": {
                d: {"contested": self.contested[d], "minority": self.minority[d], "ratio": self.ratio(d)}
                for d in self.contested
            },
            "overall_ratio": self.overall_ratio,
        }

    def format_table(self) -> str:
        width = max(len(d) for d in self.contested)
        lines = [f"labeler {self.labeler_id}", f"{'decision':<{width}}  contested  minority   ratio"]
        for d in self.contested:
            r = self.ratio(d)
            shown = "-" if r is None else f"{r * 100:.1f}%"
            lines.append(f"{d:<{width}}  {self.contested[d]:>9}  {self.minority[d]:>8}  {shown:>6}")
        lines.append(f"{'overall':<{width}}  {sum(self.contested.values()):>9}  "
                     f"{sum(self.minority.values()):>8}  {self.overall_ratio * 100:>5.1f}%")
        return "\n".join(lines)


def build_dissident_report(
    labeler_id: int,
    groups: Mapping[int, Sequence[Ballot]],
    seed: int = 0,
    languages: Mapping[int, str] | None = None,
) -> DissidentReport:
    """Count one-dissent (3:1 or 2:1) votes the labeler took part in, and how often they were the dissenter.

    With ``languages`` each decision is reported per language ("en/relevance", ...).
    """
    contested: dict[str, int] = defaultdict(int)
    minority: dict[str, int] = defaultdict(int)

    def key(tid: int, decision: str) -> str:
        return f"{languages[tid]}/{decision}" if languages is not None else decision

    def tally(tid: int, decision: str, ratio: str, mine, outcome) -> None:
        k = key(tid, decision)
        contested.setdefault(k, 0)
        minority.setdefault(k, 0)
        if ratio_column(ratio) != "3:1" or mine is None:
            return
        contested[k] += 1
        if mine != outcome:
            minority[k] += 1

    for tid in sorted(groups):
        ballots = groups[tid]
        own = next((b for b in ballots if b.labeler_id == labeler_id), None)
        relevant, rel_ratio, _ = amalgamate_relevance(ballots, seed)
        tally(tid, "relevance", rel_ratio, own.relevant if own else None, relevant)

        cond = _relevance_condition(ballots, seed)
        if cond is not None:
            polarity, pol_ratio, _ = amalgamate_polarity(ballots, True, seed)
            mine = collapse_score(own.score) if own is not None and own.score is not None else None
            tally(tid, f"sentiment3|{cond}", pol_ratio, mine, polarity)

        typeface, tf_ratio, _ = amalgamate_typeface(ballots, seed)
        if typeface is not None:
            tally(tid, "typeface", tf_ratio, own.typeface if own else None, typeface)

    if not sum(contested.values()):
        raise NoContestedVotes(f"labeler {labeler_id} took part in no contested vote")
    order = sorted(contested, key=lambda k: (k.split("/")[0] if "/" in k else "", DISSENT_DECISIONS.index(k.split("/")[-1])))
    return DissidentReport(labeler_id, {k: contested[k] for k in order}, {k: minority[k] for k in order})
