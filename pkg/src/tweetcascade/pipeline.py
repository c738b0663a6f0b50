"""Stage datasets, bundle training and held-out evaluation, driven by a Config."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping, Sequence

from .aggregation import Gazetteer
from .annotation import GoldLabel
from .cascade import (
    LANGS, TASKS, FeatureVector, HybridClassifier, Hyperparameters, ModelBundle,
    featurize, hybrid_decide, stage_key, stage_lexicon, train_linear_svm,
)
from .config import Config
from .errors import NoCjkContent
from .evaluation import EvalReport, confusion, stratified_split
from .ingest import HashtagSet, Language, LanguageRules, RawTweet
from .labels import Polarity, Typeface
from .text import Lexicon, StopList, TypefaceTable, detect_typeface, strip_noise, tokenize

CLASS_NAMES = {
    "relevance": ("Relevant", "Irrelevant"),
    "subjectivity": ("Subjective", "Objective"),
    "polarity": ("Positive", "Negative"),
}


@dataclass
class Resources:
    hashtags: HashtagSet
    polarity: dict[Language, Lexicon]
    relevance: dict[Language, Lexicon]
    stoplists: dict[Language, StopList]
    typeface: TypefaceTable
    gazetteer: Gazetteer
    rules: LanguageRules

    @classmethod
    def from_config(cls, cfg: Config) -> "Resources":
        langs = {Language.ENGLISH: "en", Language.CHINESE: "zh"}
        return cls(
            hashtags=HashtagSet.load(cfg.path("hashtags")),
            polarity={lg: Lexicon.load(cfg.path(f"lexicon.{s}"), lg) for lg, s in langs.items()},
            relevance={lg: Lexicon.load(cfg.path(f"relevance_lexicon.{s}"), lg) for lg, s in langs.items()},
            stoplists={lg: StopList.load(cfg.path(f"stoplist.{s}"), lg) for lg, s in langs.items()},
            typeface=TypefaceTable.load(cfg.path("typeface_table")),
            gazetteer=Gazetteer.load(cfg.path("gazetteer")),
            rules=LanguageRules(cfg["lang.cjk_threshold"], cfg["lang.latin_threshold"], cfg["lang.use_lang_field"]),
        )

    def lexicon_for(self, task: str, lang: Language) -> Lexicon:
        return stage_lexicon(task, self.polarity[lang], self.relevance[lang])

    def stage_lexicons(self) -> dict[str, Lexicon]:
        return {stage_key(t, lg): self.lexicon_for(t, lg) for t in TASKS for lg in LANGS}


def stage_label(task: str, gold: GoldLabel) -> bool | None:
    """Binary target of ``task`` for a gold label, or None when the tweet does not enter that stage."""
    if task == "relevance":
        return gold.relevant
    if task == "subjectivity":
        return None if gold.polarity is None else gold.polarity is not Polarity.NEUTRAL
    if gold.polarity in (Polarity.POSITIVE, Polarity.NEGATIVE):
        return gold.polarity is Polarity.POSITIVE
    return None


def stage_dataset(task: str, lang: Language, corpus: Sequence[RawTweet],
                  gold: Mapping[int, GoldLabel]) -> list[tuple[RawTweet, bool]]:
    out = []
    for t in corpus:
        if t.language is not lang or t.id not in gold:
            continue
        label = stage_label(task, gold[t.id])
        if label is not None:
            out.append((t, label))
    return out


def typeface_dataset(corpus: Sequence[RawTweet], gold: Mapping[int, GoldLabel]) -> list[tuple[RawTweet, Typeface]]:
    return [(t, gold[t.id].typeface) for t in corpus
            if t.language is Language.CHINESE and t.id in gold and gold[t.id].typeface is not None]


def ids_fingerprint(items: Sequence[tuple[RawTweet, object]]) -> str:
    h = hashlib.sha256()
    for t, label in items:
        h.update(f"{t.id}:{label}\n".encode())
    return h.hexdigest()[:16]


def split_descriptor(cfg: Config, n_train: int, n_test: int) -> dict:
    return {"scheme": "stratified", "test_fraction": cfg["split.test_fraction"], "seed": cfg.seed,
            "n_train": n_train, "n_test": n_test}


def _vectors(items, lex: Lexicon, hasher) -> list[tuple[FeatureVector, bool]]:
    return [(featurize(tokenize(t.text, t.language, t.id), lex, hasher), y) for t, y in items]


def train_bundle(
    corpus: Sequence[RawTweet],
    gold: Mapping[int, GoldLabel],
    res: Resources,
    cfg: Config,
    stages: Sequence[tuple[str, Language]] | None = None,
    base: ModelBundle | None = None,
) -> ModelBundle:
    """Train the requested stages (default: all six) on the training split of each stage dataset."""
    bundle = ModelBundle(dict(base.stages) if base else {}, cfg["hash.salt"], dict(base.meta) if base else {})
    if base is not None and base.hash_salt != cfg["hash.salt"]:
        bundle = ModelBundle({}, cfg["hash.salt"], {})
    hyper = Hyperparameters(cfg["svm.lambda"], cfg["svm.epochs"], cfg.seed)
    for task, lang in stages or [(t, lg) for lg in LANGS for t in TASKS]:
        data = stage_dataset(task, lang, corpus, gold)
        train, test = stratified_split(data, cfg["split.test_fraction"], cfg.seed)
        lex = res.lexicon_for(task, lang)
        model = train_linear_svm(_vectors(train, lex, bundle.hasher), hyper)
        key = stage_key(task, lang)
        bundle.stages[key] = HybridClassifier(model, lex, cfg.tau(task, lang.value))
        bundle.meta[key] = {"split": split_descriptor(cfg, len(train), len(test)),
                            "train_ids_fingerprint": ids_fingerprint(train)}
    return bundle


def evaluate_stage(task: str, lang: Language, corpus, gold, bundle: ModelBundle, cfg: Config) -> EvalReport:
    data = stage_dataset(task, lang, corpus, gold)
    train, test = stratified_split(data, cfg["split.test_fraction"], cfg.seed)
    clf = bundle.get(task, lang)
    pos_name, neg_name = CLASS_NAMES[task]
    golds = [pos_name if y else neg_name for _, y in test]
    preds = [pos_name if hybrid_decide(clf, tokenize(t.text, t.language, t.id), bundle.hasher) else neg_name
             for t, _ in test]
    cm = confusion(golds, preds, (pos_name, neg_name))
    return EvalReport.from_matrix(stage_key(task, lang), cm, ids_fingerprint(test),
                                  split_descriptor(cfg, len(train), len(test)))


def evaluate_typeface(corpus, gold, table: TypefaceTable, cfg: Config) -> EvalReport:
    data = typeface_dataset(corpus, gold)
    train, test = stratified_split(data, cfg["split.test_fraction"], cfg.seed)
    golds, preds = [], []
    for t, face in test:
        golds.append(face.value)
        try:
            preds.append(detect_typeface(strip_noise(t.text), table).value)
        except NoCjkContent:
            preds.append(Typeface.SIMPLIFIED.value)
    cm = confusion(golds, preds, (Typeface.SIMPLIFIED.value, Typeface.TRADITIONAL.value))
    return EvalReport.from_matrix("typeface.zh", cm, ids_fingerprint(test),
                                  split_descriptor(cfg, len(train), len(test)))


def evaluate_bundle(corpus, gold, bundle: ModelBundle, res: Resources, cfg: Config) -> list[EvalReport]:
    """The seven held-out reports in the order relevance/subjectivity/polarity (en, zh), typeface."""
    reports = [evaluate_stage(task, lang, corpus, gold, bundle, cfg) for lang in LANGS for task in TASKS]
    reports.append(evaluate_typeface(corpus, gold, res.typeface, cfg))
    return reports
