"""Hybrid lexicon + linear SVM classifiers and the four-stage cascade.

Feature space: token counts hashed into 2**20 buckets and L2-normalized,
followed by two unnormalized columns holding the lexicon positive and
negative counts.  Each binary stage pairs a hinge-loss linear model with a
lexicon; a lexicon net score of magnitude >= tau overrides the model.

Cascade per tweet: relevance -> typeface (Chinese only) -> subjectivity ->
polarity.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    BundleFormatError, MissingModel, NoCjkContent, NoData, SingleClassData, UnsupportedLanguage,
)
from .ingest import Language, RawTweet
from .labels import FinalLabel, Polarity, Typeface
from .text import Lexicon, TokenizedDoc, TypefaceTable, detect_typeface, strip_noise, tokenize

HASH_BUCKETS = 2**20
LEX_POS = HASH_BUCKETS
LEX_NEG = HASH_BUCKETS + 1
N_FEATURES = HASH_BUCKETS + 2
DEFAULT_SALT = "tweetcascade-v1"

TASKS = ("relevance", "subjectivity", "polarity")
LANGS = (Language.ENGLISH, Language.CHINESE)
BUNDLE_FORMAT = "tweetcascade.bundle"
BUNDLE_VERSION = 1


def stage_key(task: str, lang: Language | str) -> str:
    return f"{task}.{Language(lang).value}"


# --- features ---------------------------------------------------------------

class FeatureHasher:
    """Stable token -> bucket map (keyed BLAKE2b, 64-bit digest, modulo bucket count)."""

    def __init__(self, salt: str = DEFAULT_SALT, buckets: int = HASH_BUCKETS):
        self.salt = salt
        self.buckets = buckets
        self._key = salt.encode("utf-8")[:64]
        self._cache: dict[str, int] = {}

    def index(self, token: str) -> int:
        idx = self._cache.get(token)
        if idx is None:
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=self._key).digest()
            idx = int.from_bytes(digest, "little") % self.buckets
            if len(self._cache) < 1_000_000:
                self._cache[token] = idx
        return idx

    def block(self, tokens: Sequence[str]) -> tuple[tuple[int, ...], tuple[float, ...]]:
        """Sorted bucket indices and their L2-normalized counts."""
        counts: dict[int, int] = {}
        index = self.index
        for t in tokens:
            i = index(t)
            counts[i] = counts.get(i, 0) + 1
        if not counts:
            return (), ()
        keys = sorted(counts)
        norm = math.sqrt(sum(c * c for c in counts.values()))
        return tuple(keys), tuple(counts[k] / norm for k in keys)


_DEFAULT_HASHER = FeatureHasher()


@dataclass(frozen=True)
class FeatureVector:
    indices: tuple[int, ...]
    values: tuple[float, ...]
    lex_pos: int = 0
    lex_neg: int = 0

    def items(self) -> list[tuple[int, float]]:
        out = list(zip(self.indices, self.values))
        if self.lex_pos:
            out.append((LEX_POS, float(self.lex_pos)))
        if self.lex_neg:
            out.append((LEX_NEG, float(self.lex_neg)))
        return out

    def scaled(self, k: float) -> "FeatureVector":
        """Every component (lexicon counts included) multiplied by ``k``."""
        return FeatureVector(self.indices, tuple(v * k for v in self.values), self.lex_pos * k, self.lex_neg * k)


def featurize(doc: TokenizedDoc, lex: Lexicon, hasher: FeatureHasher = _DEFAULT_HASHER) -> FeatureVector:
    idx, vals = hasher.block(doc.tokens)
    pos, neg = lex.counts(doc)
    return FeatureVector(idx, vals, pos, neg)


def to_csr(vectors: Sequence[FeatureVector]) -> sp.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for fv in vectors:
        for i, v in fv.items():
            indices.append(i)
            data.append(v)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(vectors), N_FEATURES),
    )


# --- linear model -----------------------------------------------------------

@dataclass(frozen=True)
class Hyperparameters:
    lam: float = 1e-3
    epochs: int = 25
    seed: int = 0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("regularization must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "epochs": self.epochs, "seed": self.seed}


@dataclass
class LinearModel:
    weights: np.ndarray  # dense, length N_FEATURES
    bias: float
    hyperparameters: Hyperparameters
    trained_on: str = ""
    loss_history: list[float] = field(default_factory=list)

    def nonzero(self) -> list[tuple[int, float]]:
        idx = np.flatnonzero(self.weights)
        return [(int(i), float(self.weights[i])) for i in idx]


def predict_margin(model: LinearModel, x: FeatureVector) -> float:
    w = model.weights
    m = 0.0
    if x.indices:
        m = float(np.dot(w[np.asarray(x.indices)], np.asarray(x.values)))
    return m + float(w[LEX_POS]) * x.lex_pos + float(w[LEX_NEG]) * x.lex_neg + model.bias


def hinge_objective(X: sp.csr_matrix, y: np.ndarray, w: np.ndarray, b: float, lam: float) -> float:
    margins = y * (X @ w + b)
    return float(0.5 * lam * np.dot(w, w) + np.mean(np.maximum(0.0, 1.0 - margins)))


def dataset_fingerprint(X: sp.csr_matrix, y: np.ndarray) -> str:
    h = hashlib.sha256()
    for arr in (X.indptr, X.indices, X.data, y):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()[:16]


def train_linear_svm(data: Sequence[tuple[FeatureVector, bool]], hyper: Hyperparameters = Hyperparameters()) -> LinearModel:
    """Minimize lam/2*|w|^2 + mean hinge loss by seeded stochastic subgradient steps.

    Step size 1/(lam*(t + t0)) with t0 = 1/lam, so the first steps are O(1)
    rather than O(1/lam).  The weight vector is kept as scale * v to make the
    shrink step O(1).  The bias is unregularized and follows the same step.
    """
    if not data:
        raise NoData("empty training set")
    y = np.array([1.0 if label else -1.0 for _, label in data])
    if np.all(y > 0) or np.all(y < 0):
        raise SingleClassData("training data holds a single class")
    X = to_csr([fv for fv, _ in data])
    lam = hyper.lam
    t0 = 1.0 / lam
    n = X.shape[0]
    indptr, indices, values = X.indptr, X.indices, X.data

    v = np.zeros(N_FEATURES)
    scale = 1.0
    b = 0.0
    t = 0
    rng = np.random.default_rng(hyper.seed)
    history: list[float] = []
    for _ in range(hyper.epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * (t + t0))
            lo, hi = indptr[i], indptr[i + 1]
            idx, val = indices[lo:hi], values[lo:hi]
            margin = scale * float(np.dot(v[idx], val)) + b
            scale *= 1.0 - eta * lam
            if y[i] * margin < 1.0:
                v[idx] += (eta * y[i] / scale) * val
                b += eta * y[i]
            if scale < 1e-6:
                v *= scale
                scale = 1.0
        history.append(hinge_objective(X, y, scale * v, b, lam))
    w = scale * v
    return LinearModel(w, float(b), hyper, dataset_fingerprint(X, y), history)


# --- hybrid rule ------------------------------------------------------------

@dataclass
class HybridClassifier:
    model: LinearModel
    lexicon: Lexicon
    tau: int = 2

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be >= 0")


def hybrid_decide(clf: HybridClassifier, doc: TokenizedDoc, hasher: FeatureHasher = _DEFAULT_HASHER) -> bool:
    """True for the stage's positive class (relevant / subjective / Positive)."""
    pos, neg = clf.lexicon.counts(doc)
    net = pos - neg
    if net != 0 and abs(net) >= clf.tau:
        return net > 0
    idx, vals = hasher.block(doc.tokens)
    return predict_margin(clf.model, FeatureVector(idx, vals, pos, neg)) >= 0.0


def hybrid_decide_batch(clf: HybridClassifier, docs: Sequence[TokenizedDoc], block: sp.csr_matrix) -> np.ndarray:
    """Vectorized hybrid_decide; ``block`` holds the docs' hashed rows (lexicon columns empty)."""
    if not docs:
        return np.zeros(0, dtype=bool)
    counts = np.array([clf.lexicon.counts(d) for d in docs], dtype=np.float64).reshape(-1, 2)
    net = counts[:, 0] - counts[:, 1]
    w = clf.model.weights
    margins = block @ w + counts[:, 0] * w[LEX_POS] + counts[:, 1] * w[LEX_NEG] + clf.model.bias
    override = (net != 0) & (np.abs(net) >= clf.tau)
    return np.where(override, net > 0, margins >= 0.0)


# --- cascade ----------------------------------------------------------------

@dataclass(frozen=True)
class CascadeOutcome:
    relevance: bool
    typeface: Typeface | None
    subjective: bool | None
    polarity: Polarity | None
    final: FinalLabel

    def __post_init__(self):
        assert (self.final is FinalLabel.IRRELEVANT) == (not self.relevance)
        assert (self.final is FinalLabel.NEUTRAL) == (self.relevance and self.subjective is False)
        assert (self.polarity is not None) == (self.subjective is True)


def stage_lexicon(task: str, polarity_lex: Lexicon, relevance_lex: Lexicon) -> Lexicon:
    if task == "relevance":
        return relevance_lex
    if task == "subjectivity":
        return polarity_lex.affect()
    return polarity_lex


@dataclass
class ModelBundle:
    """Trained stages keyed 'task.lang', plus the hashing parameters they were trained with."""

    stages: dict[str, HybridClassifier] = field(default_factory=dict)
    hash_salt: str = DEFAULT_SALT
    meta: dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        self.hasher = FeatureHasher(self.hash_salt)

    def get(self, task: str, lang: Language) -> HybridClassifier:
        key = stage_key(task, lang)
        if key not in self.stages:
            raise MissingModel(f"stage {key}")
        return self.stages[key]

    def require(self, langs: Iterable[Language]) -> None:
        for lang in langs:
            for task in TASKS:
                self.get(task, lang)

    # serialization -----------------------------------------------------

    def to_json(self) -> str:
        stages = {}
        for key in sorted(self.stages):
            clf = self.stages[key]
            m = clf.model
            stages[key] = {
                "tau": clf.tau,
                "bias": m.bias,
                "weights": [[i, w] for i, w in m.nonzero()],
                "hyperparameters": m.hyperparameters.to_dict(),
                "trained_on": m.trained_on,
                "loss_history": m.loss_history,
                "lexicon_fingerprint": lexicon_fingerprint(clf.lexicon),
                **self.meta.get(key, {}),
            }
        doc = {
            "format": BUNDLE_FORMAT,
            "version": BUNDLE_VERSION,
            "hash_salt": self.hash_salt,
            "hash_buckets": HASH_BUCKETS,
            "stages": stages,
        }
        return json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=1) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_json(cls, text: str, lexicons: Mapping[str, Lexicon]) -> "ModelBundle":
        """``lexicons`` maps stage keys to the lexicon each stage must be scored with."""
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise BundleFormatError(str(exc)) from exc
        if doc.get("format") != BUNDLE_FORMAT or doc.get("version") != BUNDLE_VERSION:
            raise BundleFormatError("not a version-1 model bundle")
        if doc.get("hash_buckets") != HASH_BUCKETS:
            raise BundleFormatError("hash bucket count mismatch")
        stages = {}
        meta = {}
        known = {"tau", "bias", "weights", "hyperparameters", "trained_on", "loss_history", "lexicon_fingerprint"}
        for key, s in doc["stages"].items():
            if key not in lexicons:
                raise BundleFormatError(f"no lexicon supplied for stage {key}")
            lex = lexicons[key]
            if s["lexicon_fingerprint"] != lexicon_fingerprint(lex):
                raise BundleFormatError(f"stage {key} was trained with a different lexicon")
            w = np.zeros(N_FEATURES)
            for i, val in s["weights"]:
                w[i] = val
            hp = s["hyperparameters"]
            model = LinearModel(
                w, s["bias"], Hyperparameters(hp["lambda"], hp["epochs"], hp["seed"]),
                s["trained_on"], list(s["loss_history"]),
            )
            stages[key] = HybridClassifier(model, lex, s["tau"])
            meta[key] = {k: v for k, v in s.items() if k not in known}
        return cls(stages, doc["hash_salt"], meta)

    @classmethod
    def load(cls, path: str | Path, lexicons: Mapping[str, Lexicon]) -> "ModelBundle":
        p = Path(path)
        if not p.exists():
            raise MissingModel(f"no model bundle at {p}")
        return cls.from_json(p.read_text(encoding="utf-8"), lexicons)


def lexicon_fingerprint(lex: Lexicon) -> str:
    h = hashlib.sha256()
    h.update(lex.language.value.encode())
    for side in (lex.positive, lex.negative):
        h.update(b"\x00")
        for term in sorted(side):
            h.update(term.encode("utf-8") + b"\n")
    return h.hexdigest()[:16]


def classify_cascade(
    tweet: RawTweet | tuple[str, Language],
    bundle: ModelBundle,
    table: TypefaceTable | None = None,
) -> CascadeOutcome:
    """Reference single-tweet cascade.  ``tweet`` may be a RawTweet or (text, language)."""
    if isinstance(tweet, RawTweet):
        text, lang, tid = tweet.text, tweet.language, tweet.id
    else:
        (text, lang), tid = tweet, None
    if lang not in LANGS:
        raise UnsupportedLanguage(str(lang))
    doc = tokenize(text, lang, tid)
    h = bundle.hasher

    if not hybrid_decide(bundle.get("relevance", lang), doc, h):
        return CascadeOutcome(False, None, None, None, FinalLabel.IRRELEVANT)
    typeface = None
    if lang is Language.CHINESE:
        if table is None:
            raise MissingModel("typeface table")
        typeface = _typeface_or_none(text, table)
    if not hybrid_decide(bundle.get("subjectivity", lang), doc, h):
        return CascadeOutcome(True, typeface, False, None, FinalLabel.NEUTRAL)
    if hybrid_decide(bundle.get("polarity", lang), doc, h):
        return CascadeOutcome(True, typeface, True, Polarity.POSITIVE, FinalLabel.POSITIVE)
    return CascadeOutcome(True, typeface, True, Polarity.NEGATIVE, FinalLabel.NEGATIVE)


def _typeface_or_none(text: str, table: TypefaceTable) -> Typeface | None:
    try:
        return detect_typeface(strip_noise(text), table)
    except NoCjkContent:
        return None


def hashed_rows(docs: Sequence[TokenizedDoc], hasher: FeatureHasher) -> sp.csr_matrix:
    return to_csr([FeatureVector(*hasher.block(d.tokens)) for d in docs])


def classify_many(
    tweets: Sequence[RawTweet],
    bundle: ModelBundle,
    table: TypefaceTable | None = None,
    chunk: int = 20_000,
) -> list[CascadeOutcome]:
    """Batch cascade; same decisions as ``classify_cascade`` tweet by tweet."""
    out: list[CascadeOutcome | None] = [None] * len(tweets)
    for lang in LANGS:
        positions = [i for i, t in enumerate(tweets) if t.language is lang]
        if not positions:
            continue
        rel = bundle.get("relevance", lang)
        subj = bundle.get("subjectivity", lang)
        pol = bundle.get("polarity", lang)
        if lang is Language.CHINESE and table is None:
            raise MissingModel("typeface table")
        for start in range(0, len(positions), chunk):
            part = positions[start:start + chunk]
            docs = [tokenize(tweets[i].text, lang, tweets[i].id) for i in part]
            X = hashed_rows(docs, bundle.hasher)
            r = hybrid_decide_batch(rel, docs, X)
            s = hybrid_decide_batch(subj, docs, X)
            p = hybrid_decide_batch(pol, docs, X)
            for k, i in enumerate(part):
                if not r[k]:
                    out[i] = CascadeOutcome(False, None, None, None, FinalLabel.IRRELEVANT)
                    continue
                tf = _typeface_or_none(tweets[i].text, table) if lang is Language.CHINESE else None
                if not s[k]:
                    out[i] = CascadeOutcome(True, tf, False, None, FinalLabel.NEUTRAL)
                elif p[k]:
                    out[i] = CascadeOutcome(True, tf, True, Polarity.POSITIVE, FinalLabel.POSITIVE)
                else:
                    out[i] = CascadeOutcome(True, tf, True, Polarity.NEGATIVE, FinalLabel.NEGATIVE)
    for i, t in enumerate(tweets):
        if out[i] is None:
            raise UnsupportedLanguage(f"tweet {t.id}: {t.language}")
    return out  # type: ignore[return-value]
