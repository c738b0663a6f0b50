"""Flat key-value JSON configuration.

Only ``seed`` is required.  Path values may be relative; they resolve
against the config file's directory.  Unset paths point at the data files
shipped with the package.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import InvalidKey, MissingKey, UnknownKey
from .text import data_path

TASK_LANG_KEYS = [f"{task}.{lang}" for task in ("relevance", "subjectivity", "polarity") for lang in ("en", "zh")]

PATH_DEFAULTS = {
    "hashtags": "hashtags.txt",
    "lexicon.en": "lexicon_en.txt",
    "lexicon.zh": "lexicon_zh.txt",
    "relevance_lexicon.en": "relevance_en.txt",
    "relevance_lexicon.zh": "relevance_zh.txt",
    "stoplist.en": "stop_en.txt",
    "stoplist.zh": "stop_zh.txt",
    "typeface_table": "typeface_map.tsv",
    "gazetteer": "gazetteer.csv",
}

SCALAR_DEFAULTS: dict[str, Any] = {
    "lang.cjk_threshold": 0.30,
    "lang.latin_threshold": 0.80,
    "lang.use_lang_field": False,
    "utc_offset_hours": 8,
    "svm.lambda": 1e-3,
    "svm.epochs": 25,
    "split.test_fraction": 0.2,
    "hash.salt": "tweetcascade-v1",
    "words.top_k": 10,
    **{f"tau.{k}": 2 for k in TASK_LANG_KEYS},
}

ALL_KEYS = ("seed",) + tuple(SCALAR_DEFAULTS) + tuple(PATH_DEFAULTS)


def _check_number(key: str, value, lo=None, hi=None, integer=False, lo_open=False, hi_open=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidKey(key, f"expected a number, got {value!r}")
    if integer and not isinstance(value, int):
        raise InvalidKey(key, f"expected an integer, got {value!r}")
    if lo is not None and (value < lo or (lo_open and value == lo)):
        raise InvalidKey(key, f"{value!r} below range")
    if hi is not None and (value > hi or (hi_open and value == hi)):
        raise InvalidKey(key, f"{value!r} above range")


@dataclass(frozen=True)
class Config:
    values: dict[str, Any]
    base_dir: Path

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def seed(self) -> int:
        return self.values["seed"]

    def path(self, key: str) -> Path:
        return Path(self.values[key])

    def tau(self, task: str, lang: str) -> int:
        return self.values[f"tau.{task}.{lang}"]

    def to_dict(self) -> dict[str, Any]:
        return {k: self.values[k] for k in ALL_KEYS}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False).encode()).hexdigest()[:16]

    def __eq__(self, other) -> bool:
        return isinstance(other, Config) and self.to_dict() == other.to_dict()


def config_from_dict(raw: dict[str, Any], base_dir: str | Path = ".") -> Config:
    if not isinstance(raw, dict):
        raise InvalidKey("<root>", "config must be a JSON object")
    base = Path(base_dir)
    for key in raw:
        if key not in ALL_KEYS:
            raise UnknownKey(key)
    if "seed" not in raw:
        raise MissingKey("seed")
    values: dict[str, Any] = {}

    seed = raw["seed"]
    _check_number("seed", seed, 0, 2**64 - 1, integer=True)
    values["seed"] = seed

    for key, default in SCALAR_DEFAULTS.items():
        values[key] = raw.get(key, default)
    for key in ("lang.cjk_threshold", "lang.latin_threshold"):
        _check_number(key, values[key], 0.0, 1.0)
    if not isinstance(values["lang.use_lang_field"], bool):
        raise InvalidKey("lang.use_lang_field", "expected true or false")
    _check_number("utc_offset_hours", values["utc_offset_hours"], -14, 14)
    _check_number("svm.lambda", values["svm.lambda"], 0.0, lo_open=True)
    _check_number("svm.epochs", values["svm.epochs"], 1, integer=True)
    _check_number("split.test_fraction", values["split.test_fraction"], 0.0, 1.0, lo_open=True, hi_open=True)
    if not isinstance(values["hash.salt"], str) or not values["hash.salt"]:
        raise InvalidKey("hash.salt", "expected a non-empty string")
    _check_number("words.top_k", values["words.top_k"], 1, integer=True)
    for k in TASK_LANG_KEYS:
        _check_number(f"tau.{k}", values[f"tau.{k}"], 0, integer=True)

    for key, default in PATH_DEFAULTS.items():
        if key in raw:
            if not isinstance(raw[key], str) or not raw[key]:
                raise InvalidKey(key, "expected a path string")
            p = Path(raw[key])
            p = p if p.is_absolute() else (base / p)
        else:
            p = data_path(default)
        p = p.resolve()
        if not p.is_file():
            raise InvalidKey(key, f"no such file: {p}")
        values[key] = str(p)
    return Config(values, base)


def load_config(path: str | Path) -> Config:
    p = Path(path)
    if not p.is_file():
        raise MissingKey(str(p), "config file not found")
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidKey("<root>", f"not valid JSON: {exc}") from exc
    return config_from_dict(raw, p.parent)


def default_config(seed: int = 0) -> Config:
    return config_from_dict({"seed": seed})
