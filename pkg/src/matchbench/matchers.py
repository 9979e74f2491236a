"""Built-in matcher scoring functions over profiled attribute views.

Five deterministic built-ins cover the lexical and instance-based families:
``name_edit``, ``name_token_jaccard``, ``name_trigram``, ``value_overlap``,
and ``distribution``. Embedding / model-backed matchers join through the
external plugin protocol instead.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownMatcherError
from .ingest import TYPE_NUMERIC, Dataset, is_null, numeric_values
from .textutil import canonicalize_name, char_trigrams, edit_similarity, jaccard

BUILTIN_MATCHER_IDS = (
    "name_edit",
    "name_token_jaccard",
    "name_trigram",
    "value_overlap",
    "distribution",
)

VALUE_SET_CAP = 1000
SHARED_HISTOGRAM_BINS = 10


@dataclass
class AttributeView:
    """Precomputed per-attribute features consumed by the matchers."""

    name: str
    inferred_type: str
    canonical: str
    tokens: frozenset[str]
    trigrams: frozenset[str]
    value_set: frozenset[str] = frozenset()
    numeric: np.ndarray | None = None
    samples: list[str] = field(default_factory=list)
    description: str | None = None


def build_view(dataset: Dataset, name: str) -> AttributeView:
    attr = dataset.attribute(name)
    canonical, tokens = canonicalize_name(name)

    counts: Counter[str] = Counter()
    samples: list[str] = []
    for raw in dataset.columns[name]:
        if is_null(raw):
            continue
        canon_value = canonicalize_name(raw.strip())[0]
        if canon_value:
            counts[canon_value] += 1
        if len(samples) < 10 and raw.strip() not in samples:
            samples.append(raw.strip())
    top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:VALUE_SET_CAP]

    numeric = None
    if attr.inferred_type == TYPE_NUMERIC:
        nums = numeric_values(dataset, name)
        if nums:
            numeric = np.asarray(nums, dtype=float)

    return AttributeView(
        name=name,
        inferred_type=attr.inferred_type,
        canonical=canonical,
        tokens=frozenset(tokens),
        trigrams=char_trigrams(canonical),
        value_set=frozenset(v for v, _ in top),
        numeric=numeric,
        samples=samples,
        description=attr.description,
    )


def build_views(dataset: Dataset) -> dict[str, AttributeView]:
    return {a.name: build_view(dataset, a.name) for a in dataset.attributes}


def name_edit(a: AttributeView, b: AttributeView) -> float:
    return edit_similarity(a.canonical, b.canonical)


def name_token_jaccard(a: AttributeView, b: AttributeView) -> float:
    if a.canonical == b.canonical:
        return 1.0
    return jaccard(a.tokens, b.tokens)


def name_trigram(a: AttributeView, b: AttributeView) -> float:
    if a.canonical == b.canonical:
        return 1.0
    return jaccard(a.trigrams, b.trigrams)


def value_overlap(a: AttributeView, b: AttributeView) -> float:
    return jaccard(a.value_set, b.value_set)


def distribution(a: AttributeView, b: AttributeView) -> float:
    """Instance-distribution agreement; cross-type pairs score 0.

    Numeric pairs compare histograms re-binned to a shared equal-width grid
    over the union range (1 minus total-variation distance); same-type
    non-numeric pairs fall back to value-set Jaccard.
    """
    if a.inferred_type != b.inferred_type:
        return 0.0
    if a.inferred_type == TYPE_NUMERIC:
        if a.numeric is None or b.numeric is None:
            return 0.0
        return _histogram_agreement(a.numeric, b.numeric)
    return jaccard(a.value_set, b.value_set)


def _histogram_agreement(a: np.ndarray, b: np.ndarray, bins: int = SHARED_HISTOGRAM_BINS) -> float:
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if lo == hi:
        return 1.0
    pa, _ = np.histogram(a, bins=bins, range=(lo, hi))
    pb, _ = np.histogram(b, bins=bins, range=(lo, hi))
    p = pa / pa.sum()
    q = pb / pb.sum()
    tv = 0.5 * float(np.abs(p - q).sum())
    return 1.0 - tv


_BUILTIN_FUNCS = {
    "name_edit": name_edit,
    "name_token_jaccard": name_token_jaccard,
    "name_trigram": name_trigram,
    "value_overlap": value_overlap,
    "distribution": distribution,
}


def score_pair(matcher_id: str, source: AttributeView, target: AttributeView) -> float:
    """Score one (source, target) pair with a built-in matcher."""
    try:
        func = _BUILTIN_FUNCS[matcher_id]
    except KeyError:
        raise UnknownMatcherError(f"unknown builtin matcher {matcher_id!r}") from None
    return func(source, target)


def score_table(
    matcher_id: str,
    source_views: dict[str, AttributeView],
    target_views: dict[str, AttributeView],
) -> dict[str, dict[str, float]]:
    """All-pairs score table {source: {target: score}} for one built-in matcher."""
    func = _BUILTIN_FUNCS.get(matcher_id)
    if func is None:
        raise UnknownMatcherError(f"unknown builtin matcher {matcher_id!r}")
    return {
        s_name: {t_name: func(s_view, t_view) for t_name, t_view in target_views.items()}
        for s_name, s_view in source_views.items()
    }
