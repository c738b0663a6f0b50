from __future__ import annotations

from enum import Enum


class Polarity(str, Enum):
    # declaration order is the canonical tie-break order
    POSITIVE = "Positive"
    NEUTRAL = "Neutral"
    NEGATIVE = "Negative"


class Typeface(str, Enum):
    SIMPLIFIED = "Simplified"
    TRADITIONAL = "Traditional"


class FinalLabel(str, Enum):
    IRRELEVANT = "Irrelevant"
    NEUTRAL = "Neutral"
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
