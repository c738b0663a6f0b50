from __future__ import annotations

from collections import Counter

import pytest
from hypothesis import assume, given, settings, strategies as st

from tweetcascade.charclass import is_cjk
from tweetcascade.errors import DataFileError, LanguageMismatch, NoCjkContent
from tweetcascade.ingest import Language
from tweetcascade.labels import Typeface
from tweetcascade.text import (
    Lexicon, StopList, TokenizedDoc, TypefaceTable, data_path, detect_typeface, lexicon_net_score,
    strip_noise, tokenize, tokenize_chinese, tokenize_english,
)

TABLE = TypefaceTable.load(data_path("typeface_map.tsv"))
EN = Language.ENGLISH
ZH = Language.CHINESE


def doc(tokens, lang=EN):
    return TokenizedDoc(None, list(tokens), lang)


# --- strip_noise ---------------------------------------------------------------

@pytest.mark.parametrize("raw, clean", [
    ("RT @HappsNews: NOW: Pro-democracy protests … https://t.co/x", "NOW: Pro-democracy protests …"),
    ("#China70years is here", "China70years is here"),
    ("", ""),
    ("  many   spaces\n\there ", "many spaces here"),
    ("@a @b_c hi http://x.y/z?q=1 #中国", "hi 中国"),
    ("ART is not a retweet", "ART is not a retweet"),
])
def test_strip_noise(raw, clean):
    assert strip_noise(raw) == clean


@given(st.text(alphabet=st.sampled_from(list("RT@#:/ htpsabc中国_.\n")), max_size=40))
def test_strip_noise_never_grows(text):
    out = strip_noise(text)
    assert len(out) <= len(text)
    assert strip_noise(out) == out or len(strip_noise(out)) <= len(out)


# --- tokenizers ------------------------------------------------------------------

@pytest.mark.parametrize("text, tokens", [
    ("Happy 70th Anniversary to China.", ["happy", "70th", "anniversary", "to", "china"]),
    ("Best wishes from Pakistan", ["best", "wishes", "from", "pakistan"]),
    ("don't", ["don't"]),
    ("snake_case-words", ["snake", "case", "words"]),
    ("", []),
])
def test_tokenize_english(text, tokens):
    assert tokenize_english(text).tokens == tokens


def test_tokenize_chinese_run():
    assert tokenize_chinese("祖国万岁").tokens == ["祖", "国", "万", "岁", "祖国", "国万", "万岁"]


def _windowing_oracle(text: str) -> Counter:
    """Brute force: every CJK char, every adjacent CJK pair, every maximal non-CJK alnum run."""
    out: Counter = Counter(c for c in text if is_cjk(c))
    out.update(text[i:i + 2] for i in range(len(text) - 1) if is_cjk(text[i]) and is_cjk(text[i + 1]))
    run = ""
    for c in text + "。":
        if is_cjk(c) or not (c.isalnum() or c in "'"):
            if run:
                out[run.lower()] += 1
            run = ""
        else:
            run += c
    return out


def test_tokenize_chinese_bigrams_do_not_cross_digits():
    toks = tokenize_chinese("国庆70年").tokens
    assert Counter(toks) == Counter(["国", "庆", "年", "国庆", "70"])
    assert "庆7" not in toks and "庆年" not in toks


def test_tokenize_chinese_empty():
    assert tokenize_chinese("").tokens == []


@settings(max_examples=200)
@given(st.text(alphabet=st.sampled_from(list("国庆阅兵万岁中华 70abAB!，")), max_size=20))
def test_tokenize_chinese_matches_windowing_oracle(text):
    assert Counter(tokenize_chinese(text).tokens) == _windowing_oracle(text)


@given(st.text(alphabet=st.sampled_from(list("abcXYZ019' _-.,!é")), max_size=30))
def test_english_tokenizer_idempotent(text):
    toks = tokenize_english(text).tokens
    assert tokenize_english(" ".join(toks)).tokens == toks


@pytest.mark.parametrize("raw", ["RT @user: look http://t.co/abc #China", "@x: 国庆快乐 https://t.co/1 #中国"])
def test_tokenized_docs_carry_no_noise(raw):
    for lang in (EN, ZH):
        toks = tokenize(raw, lang).tokens
        assert "rt" not in toks and not any(t.startswith(("http", "@", "t.co")) or t == "user" for t in toks)


def test_hashtag_body_is_a_token():
    assert "china70years" in tokenize("Great day #China70years", EN).tokens


# --- lexicons ----------------------------------------------------------------------

def test_net_score_examples():
    lex = Lexicon(EN, frozenset({"happy"}), frozenset({"protests", "riot"}))
    assert lexicon_net_score(doc(["happy", "anniversary", "china"]), lex) == 1
    assert lexicon_net_score(doc(["protests", "riot"]), lex) == -2
    assert lexicon_net_score(doc([]), lex) == 0


def test_multiword_terms_match_contiguously():
    lex = Lexicon(EN, frozenset({"long live", "happy"}), frozenset({"tear gas"}))
    d = tokenize_english("Long live China! tear gas, tear down gas, long live")
    assert lex.counts(d) == (2, 1)
    assert lex.counts(tokenize_english("tear gas and more tear gas")) == (0, 2)
    assert lex.counts(tokenize_english("long and live")) == (0, 0)


def test_chinese_long_terms_match_as_bigram_chains():
    lex = Lexicon(ZH, frozenset({"生日快乐", "好"}), frozenset({"暴乱"}))
    assert lex.counts(tokenize_chinese("祝祖国生日快乐")) == (1, 0)
    assert lex.counts(tokenize_chinese("生日 快乐")) == (0, 0)
    assert lex.counts(tokenize_chinese("好好 暴乱")) == (2, 1)


def test_language_mismatch():
    lex = Lexicon(EN, frozenset({"happy"}), frozenset())
    with pytest.raises(LanguageMismatch):
        lexicon_net_score(doc(["快"], ZH), lex)


def test_lexicon_rejects_overlap_and_parses_sections():
    with pytest.raises(DataFileError):
        Lexicon(EN, frozenset({"x"}), frozenset({"x"}))
    lex = Lexicon.parse("; note\n[positive]\nHappy\nlong  live\n[negative]\nriot\n", EN)
    assert lex.positive == {"happy", "long live"} and lex.negative == {"riot"}
    with pytest.raises(DataFileError):
        Lexicon.parse("orphan\n", EN)


@pytest.mark.parametrize("lang", [EN, ZH])
def test_shipped_lexicons_are_well_formed(lang):
    lex = Lexicon.load(data_path(f"lexicon_{lang.value}.txt"), lang)
    assert not lex.positive & lex.negative
    assert len(lex.positive) >= 150 and len(lex.negative) >= 150
    for side, terms in ((0, lex.positive), (1, lex.negative)):
        for term in terms:
            # every term is in tokenizer normal form, so it is reachable by matching
            assert lex.counts(tokenize(term, lang))[side] >= 1, term


@pytest.mark.parametrize("lang", [EN, ZH])
def test_shipped_stoplists_nonempty(lang):
    assert len(StopList.load(data_path(f"stop_{lang.value}.txt"), lang).terms) > 20


_words = st.lists(st.sampled_from(["happy", "great", "riot", "china", "the", "long", "live"]), max_size=8)


@given(_words, _words)
def test_net_score_additive_without_multiword_terms(a, b):
    lex = Lexicon(EN, frozenset({"happy", "great"}), frozenset({"riot"}))
    assert lexicon_net_score(doc(a + b), lex) == lexicon_net_score(doc(a), lex) + lexicon_net_score(doc(b), lex)


# --- typeface ------------------------------------------------------------------------

def test_table_sets_disjoint_and_membership():
    assert not TABLE.simplified_only & TABLE.traditional_only
    for c in "国阅":
        assert c in TABLE.simplified_only
    for c in "國閱慶":
        assert c in TABLE.traditional_only
    for c in "周年":
        assert c not in TABLE.simplified_only and c not in TABLE.traditional_only


def _membership_oracle(text: str) -> Typeface:
    """Reads the mapping file directly, independent of TypefaceTable."""
    left, right = set(), set()
    for raw in data_path("typeface_map.tsv").read_text(encoding="utf-8").splitlines():
        if raw and not raw.startswith("#"):
            s, t = raw.split("\t")
            left.add(s)
            right.add(t)
    s = sum(c in left - right for c in text)
    t = sum(c in right - left for c in text)
    return Typeface.TRADITIONAL if t > s else Typeface.SIMPLIFIED


@pytest.mark.parametrize("text, face", [
    ("国庆阅兵", Typeface.SIMPLIFIED),
    ("國慶閱兵", Typeface.TRADITIONAL),
    ("70周年", Typeface.SIMPLIFIED),
])
def test_detect_typeface(text, face):
    assert detect_typeface(text, TABLE) is face
    assert _membership_oracle(text) is face


def test_detect_typeface_requires_cjk():
    with pytest.raises(NoCjkContent):
        detect_typeface("hello 70", TABLE)


_S2T = sorted(c for c in TABLE.simplified_only if TABLE.to_traditional(c) in TABLE.traditional_only)


@settings(max_examples=200)
@given(st.lists(st.sampled_from(_S2T), min_size=1, max_size=12).map("".join))
def test_typeface_flips_under_mapping(text):
    assert detect_typeface(text, TABLE) is Typeface.SIMPLIFIED
    trad = TABLE.to_traditional(text)
    assume(all(c in TABLE.traditional_only for c in trad))
    assert detect_typeface(trad, TABLE) is Typeface.TRADITIONAL
