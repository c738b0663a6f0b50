"""Character-class predicates shared by ingestion and tokenization."""

from __future__ import annotations

import unicodedata

# CJK Unified Ideographs, Extension A, compatibility block, Extensions B..F.
_CJK_RANGES = (
    (0x4E00, 0x9FFF),
    (0x3400, 0x4DBF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2A6DF),
    (0x2A700, 0x2EBEF),
    (0x30000, 0x3134F),
)


def is_cjk(ch: str) -> bool:
    cp = ord(ch)
    if cp < 0x3400:
        return False
    for lo, hi in _CJK_RANGES:
        if lo <= cp <= hi:
            return True
    return False


def is_letter(ch: str) -> bool:
    return unicodedata.category(ch).startswith("L")


def is_basic_latin_letter(ch: str) -> bool:
    return ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def is_word_char(ch: str) -> bool:
    """Letters, digits, underscore and CJK ideographs; anything else is a boundary."""
    return ch == "_" or ch.isalnum() or is_cjk(ch)
