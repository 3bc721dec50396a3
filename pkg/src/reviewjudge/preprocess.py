"""Text normalization pipeline: accents, punctuation, stopwords, lemmas.

Stages run in a fixed order: normalize -> tokenize -> remove stopwords ->
lemmatize.  Every stage is pure and deterministic, so the whole pipeline can
fan out over reviews without coordination.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Review

VOWELS = set("aeiou")

# Latin characters NFKD cannot decompose to ASCII.
_TRANSLIT_SUPPLEMENT = {
    "æ": "ae",  # ae ligature
    "œ": "oe",  # oe ligature
    "ø": "o",
    "ð": "d",  # eth
    "þ": "th",  # thorn
    "ß": "ss",  # sharp s
    "đ": "d",  # d with stroke
    "ħ": "h",  # h with stroke
    "ł": "l",  # l with stroke
    "ŋ": "ng",  # eng
    "ŧ": "t",  # t with stroke
    "ı": "i",  # dotless i
    "ĸ": "k",  # kra
}

_ALLOWED = set("abcdefghijklmnopqrstuvwxyz0123456789 ")


@dataclass(frozen=True)
class TokenizedReview:
    review_id: int
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class StopwordList:
    words: frozenset[str]
    source: str  # "builtin" or "file"

    def __contains__(self, token: str) -> bool:
        return token in self.words

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class FrequencyTable:
    entries: tuple[tuple[str, int], ...]  # count descending, ties lexicographic

    def top(self, n: int) -> list[tuple[str, int]]:
        return list(self.entries[:n])


def _read_word_file(lines: Iterable[str]) -> list[str]:
    words = []
    for line in lines:
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.append(word)
    return words


def load_stopwords(path: str | Path) -> StopwordList:
    """Stopwords from a file: one word per line, '#' comments."""
    with Path(path).open(encoding="utf-8") as fh:
        return StopwordList(words=frozenset(_read_word_file(fh)), source="file")


def builtin_stopwords() -> StopwordList:
    text = resources.files("reviewjudge").joinpath("data/stopwords_en.txt").read_text("utf-8")
    return StopwordList(words=frozenset(_read_word_file(text.splitlines())), source="builtin")


def _load_lemma_exceptions() -> dict[str, str]:
    text = resources.files("reviewjudge").joinpath("data/lemma_exceptions.txt").read_text("utf-8")
    table = {}
    for line in text.splitlines():
        entry = line.split("#", 1)[0].strip()
        if not entry:
            continue
        form, lemma = entry.split()
        table[form] = lemma
    return table


_LEMMA_EXCEPTIONS = _load_lemma_exceptions()


class _NormalizeTable(dict):
    """codepoint -> replacement map for str.translate, filled lazily.

    Each character is folded once: transliteration supplement, then NFKD
    with combining marks stripped; surviving allowed characters stay,
    other ASCII becomes a word boundary, anything else is dropped.
    """

    def __missing__(self, codepoint: int) -> str:
        ch = chr(codepoint)
        out = []
        for part in _TRANSLIT_SUPPLEMENT.get(ch, ch):
            for d in unicodedata.normalize("NFKD", part):
                if unicodedata.combining(d):
                    continue
                if d in _ALLOWED:
                    out.append(d)
                elif d.isspace() or d.isascii():
                    out.append(" ")
                # remaining non-ASCII is dropped outright
        replacement = "".join(out)
        self[codepoint] = replacement
        return replacement


_NORMALIZE_TABLE = _NormalizeTable()


def normalize_text(text: str) -> str:
    """Lowercase, transliterate accents to ASCII, blank out punctuation.

    Output uses only ASCII lowercase letters, digits, and single spaces;
    characters with no ASCII transliteration are dropped.
    """
    return " ".join(text.lower().translate(_NORMALIZE_TABLE).split())


def tokenize(text: str) -> list[str]:
    """Split normalized text on whitespace runs; empty tokens never appear."""
    return text.split()


def remove_stopwords(tokens: Sequence[str], stopwords: StopwordList) -> list[str]:
    return [t for t in tokens if t not in stopwords]


def _strip_plural(token: str) -> str:
    if token.endswith("sses"):
        return token[:-2]
    if token.endswith("ies") and len(token) > 4:
        return token[:-3] + "y"
    if token.endswith("zzes"):
        return token[:-3]
    if token.endswith(("xes", "ches", "shes", "oes")):
        return token[:-2]
    if token.endswith(("ss", "us", "is")):
        return token
    if len(token) > 3:
        return token[:-1]
    return token


def _strip_ing(token: str) -> str:
    if len(token) <= 5:
        return token
    if token.endswith("ying"):
        return token[:-4] + "y"
    stem = token[:-3]
    if not VOWELS & set(stem):
        return token
    if stem[-1] == stem[-2] and stem[-1] not in "lsz" and stem[-1] not in VOWELS:
        return stem[:-1]
    return stem


def _strip_ed(token: str) -> str:
    if len(token) <= 4 or token.endswith("eed"):
        return token
    if token.endswith("ied"):
        return token[:-3] + "y"
    stem = token[:-2]
    if not VOWELS & set(stem):
        return token
    if stem[-1] == stem[-2] and stem[-1] not in "lsz" and stem[-1] not in VOWELS:
        return stem[:-1]
    return stem


def _strip_ly(token: str) -> str:
    if len(token) <= 4:
        return token
    if token.endswith("ily"):
        return token[:-3] + "y"
    stem = token[:-2]
    if VOWELS & set(stem):
        return stem
    return token


def lemmatize(token: str) -> str:
    """Rule-based lemma: exception table plus suffix stripping to a fixpoint.

    Handles plural -s/-es, -ing, -ed, and -ly with consonant undoubling;
    iterating to a fixpoint makes the map idempotent by construction.
    """
    for _ in range(5):
        if token in _LEMMA_EXCEPTIONS:
            mapped = _LEMMA_EXCEPTIONS[token]
            if mapped == token:
                return token  # protected form, rules must not touch it
            token = mapped
            continue
        previous = token
        if token.endswith("s"):
            token = _strip_plural(token)
        elif token.endswith("ing"):
            token = _strip_ing(token)
        elif token.endswith("ed"):
            token = _strip_ed(token)
        elif token.endswith("ly"):
            token = _strip_ly(token)
        if token == previous:
            break
    return token


def preprocess_review(review: Review, stopwords: StopwordList) -> TokenizedReview:
    """normalize -> tokenize -> remove stopwords -> lemmatize."""
    tokens = remove_stopwords(tokenize(normalize_text(review.text)), stopwords)
    return TokenizedReview(
        review_id=review.id, tokens=tuple(lemmatize(t) for t in tokens)
    )


def preprocess_corpus(
    reviews: Iterable[Review], stopwords: StopwordList
) -> list[TokenizedReview]:
    return [preprocess_review(r, stopwords) for r in reviews]


def frequency_table(
    corpus: Iterable[Review] | Iterable[Sequence[str]],
    stage: str = "cleaned",
    stopwords: StopwordList | None = None,
) -> FrequencyTable:
    """Token counts, sorted by count descending then token ascending.

    ``stage="raw"`` counts normalized tokens before stopword removal (the
    word-cloud view); ``stage="cleaned"`` counts full pipeline output.
    Pre-tokenized input is counted as-is regardless of stage.
    """
    if stage not in ("raw", "cleaned"):
        raise ValueError(f"unknown stage {stage!r} (expected raw or cleaned)")
    active = stopwords if stopwords is not None else builtin_stopwords()
    counts: Counter[str] = Counter()
    for item in corpus:
        if isinstance(item, Review):
            if stage == "raw":
                counts.update(tokenize(normalize_text(item.text)))
            else:
                counts.update(preprocess_review(item, active).tokens)
        elif isinstance(item, TokenizedReview):
            counts.update(item.tokens)
        else:
            counts.update(item)
    entries = tuple(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
    return FrequencyTable(entries=entries)
