"""Name canonicalization and string-similarity primitives shared by the matchers."""

from __future__ import annotations

import re
from functools import lru_cache

_CAMEL_BOUNDARY = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")
_NON_ALNUM = re.compile(r"[^0-9a-z]+")


@lru_cache(maxsize=65536)
def canonicalize_name(name: str) -> tuple[str, tuple[str, ...]]:
    """Return (canonical form, tokens) for an attribute or value name.

    camelCase is split at case boundaries, everything is lowercased, and
    runs of non-alphanumerics collapse to single spaces. An all-caps run
    like "BMI" stays a single token.
    """
    spaced = _CAMEL_BOUNDARY.sub(" ", name)
    canonical = _NON_ALNUM.sub(" ", spaced.lower()).strip()
    canonical = re.sub(r" +", " ", canonical)
    return canonical, tuple(canonical.split())


def canonical(name: str) -> str:
    return canonicalize_name(name)[0]


def tokens(name: str) -> tuple[str, ...]:
    return canonicalize_name(name)[1]


def levenshtein(a: str, b: str) -> int:
    """Plain edit distance (insert/delete/substitute, unit costs)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    # two-row DP; b is the shorter string
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        append = cur.append
        for j, cb in enumerate(b, start=1):
            cost = prev[j - 1] if ca == cb else prev[j - 1] + 1
            d = prev[j] + 1
            if d < cost:
                cost = d
            i_cost = cur[j - 1] + 1
            if i_cost < cost:
                cost = i_cost
            append(cost)
        prev = cur
    return prev[-1]


@lru_cache(maxsize=262144)
def edit_similarity(a: str, b: str) -> float:
    """1 - levenshtein / max(len); identical strings (including two empties) give 1."""
    if a == b:
        return 1.0
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def jaccard(a: frozenset | set, b: frozenset | set) -> float:
    """|a & b| / |a | b|; two empty sets score 0 (no evidence of overlap)."""
    if not a and not b:
        return 0.0
    inter = len(a & b)
    if inter == 0:
        return 0.0
    return inter / (len(a) + len(b) - inter)


def char_trigrams(text: str, pad: str = "#") -> frozenset[str]:
    """Padded character 3-grams; padding makes endpoints count toward overlap."""
    if not text:
        return frozenset()
    padded = pad * 2 + text + pad * 2
    return frozenset(padded[i : i + 3] for i in range(len(padded) - 2))
