"""Criterion-based candidate explanations with a deterministic overall diagnosis.

Seven criteria are always reported; ones that cannot be evaluated (missing
descriptions, schema-only data, no history) carry a null score and an
evidence note. An optional chat-completion endpoint can add narrative text,
but it never changes scores or the diagnosis.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field

import httpx

from .ingest import TYPE_CATEGORICAL
from .matchers import AttributeView, distribution, name_edit, name_token_jaccard, value_overlap
from .textutil import canonical, canonicalize_name, jaccard

CRITERIA = (
    "name_similarity",
    "token_patterns",
    "semantic_meaning",
    "value_compatibility",
    "distribution_patterns",
    "historical_mappings",
    "domain_knowledge",
)

DIAGNOSIS_MATCH = "likely_match"
DIAGNOSIS_MISMATCH = "likely_mismatch"
DIAGNOSIS_UNDETERMINED = "undetermined"

MATCH_THRESHOLD = 0.6
MISMATCH_THRESHOLD = 0.4


@dataclass
class Criterion:
    name: str
    score: float | None
    evidence: str

    def to_dict(self) -> dict:
        return {"name": self.name, "score": self.score, "evidence": self.evidence}


@dataclass
class Explanation:
    source: str
    target: str
    criteria: list[Criterion]
    diagnosis: str
    narrative: str | None = None
    warning: str | None = None

    def criterion(self, name: str) -> Criterion:
        for c in self.criteria:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "criteria": [c.to_dict() for c in self.criteria],
            "diagnosis": self.diagnosis,
            "narrative": self.narrative,
            "warning": self.warning,
        }


def diagnose(criteria: list[Criterion]) -> str:
    """Overall diagnosis from criterion scores.

    Hard veto first: zero value compatibility is a mismatch no matter what.
    Otherwise the mean of the applicable (non-null) scores decides:
    >= 0.6 match, <= 0.4 mismatch, in between undetermined.
    """
    for c in criteria:
        if c.name == "value_compatibility" and c.score == 0.0:
            return DIAGNOSIS_MISMATCH
    scores = [c.score for c in criteria if c.score is not None]
    if not scores:
        return DIAGNOSIS_UNDETERMINED
    mean = sum(scores) / len(scores)
    if mean >= MATCH_THRESHOLD:
        return DIAGNOSIS_MATCH
    if mean <= MISMATCH_THRESHOLD:
        return DIAGNOSIS_MISMATCH
    return DIAGNOSIS_UNDETERMINED


def _has_values(view: AttributeView) -> bool:
    return bool(view.value_set) or view.numeric is not None


def explain_candidate(
    source: AttributeView,
    target: AttributeView,
    history: set[tuple[str, str]] | None = None,
    synonyms: set[frozenset[str]] | None = None,
) -> Explanation:
    """Build the structured explanation for one candidate pair.

    Every criterion uses a deterministic proxy: lexical scores from the name
    matchers, description token overlap for semantics, type agreement refined
    by value overlap for compatibility, the distribution matcher for shape,
    membership tests for history and domain knowledge.
    """
    criteria: list[Criterion] = []

    criteria.append(
        Criterion(
            "name_similarity",
            name_edit(source, target),
            f"edit similarity of {source.canonical!r} vs {target.canonical!r}",
        )
    )
    criteria.append(
        Criterion(
            "token_patterns",
            name_token_jaccard(source, target),
            f"token overlap of {sorted(source.tokens)} vs {sorted(target.tokens)}",
        )
    )

    if source.description and target.description:
        s_tokens = frozenset(canonicalize_name(source.description)[1])
        t_tokens = frozenset(canonicalize_name(target.description)[1])
        score = 1.0 if (s_tokens == t_tokens and s_tokens) else jaccard(s_tokens, t_tokens)
        criteria.append(Criterion("semantic_meaning", score, "token overlap of descriptions"))
    else:
        criteria.append(Criterion("semantic_meaning", None, "description missing on at least one side"))

    both_have_values = _has_values(source) and _has_values(target)
    if not both_have_values:
        criteria.append(Criterion("value_compatibility", None, "no values available on at least one side"))
        criteria.append(Criterion("distribution_patterns", None, "no values available on at least one side"))
    else:
        if source.inferred_type != target.inferred_type:
            criteria.append(
                Criterion(
                    "value_compatibility",
                    0.0,
                    f"type clash: {source.inferred_type} vs {target.inferred_type}",
                )
            )
            criteria.append(
                Criterion("distribution_patterns", None, "distributions of different types are not comparable")
            )
        else:
            if source.inferred_type == TYPE_CATEGORICAL:
                compat = value_overlap(source, target)
                evidence = f"both categorical; value overlap {compat:.3f}"
            else:
                compat = 1.0
                evidence = f"matching types ({source.inferred_type})"
            criteria.append(Criterion("value_compatibility", compat, evidence))
            criteria.append(
                Criterion(
                    "distribution_patterns",
                    distribution(source, target),
                    "agreement of value distributions",
                )
            )

    if history is None:
        criteria.append(Criterion("historical_mappings", None, "no historical ground truth loaded"))
    else:
        seen = (source.name, target.name) in history
        criteria.append(
            Criterion(
                "historical_mappings",
                1.0 if seen else 0.0,
                "pair occurs in imported history" if seen else "pair absent from imported history",
            )
        )

    key = frozenset({canonical(source.name), canonical(target.name)})
    if synonyms and key in synonyms:
        criteria.append(Criterion("domain_knowledge", 1.0, "listed as synonyms in the domain file"))
    else:
        criteria.append(Criterion("domain_knowledge", None, "no domain-knowledge entry for this pair"))

    return Explanation(
        source=source.name,
        target=target.name,
        criteria=criteria,
        diagnosis=diagnose(criteria),
    )


def load_synonyms(source) -> set[frozenset[str]]:
    """Read a two-column CSV of equivalent names into canonical synonym pairs."""
    if isinstance(source, bytes):
        text = source.decode("utf-8-sig")
    elif hasattr(source, "read"):
        data = source.read()
        text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    else:
        with open(source, "rb") as fh:
            text = fh.read().decode("utf-8-sig")
    pairs: set[frozenset[str]] = set()
    for row in csv.reader(io.StringIO(text, newline="")):
        if len(row) >= 2 and row[0].strip() and row[1].strip():
            pairs.add(frozenset({canonical(row[0]), canonical(row[1])}))
    return pairs


@dataclass
class LlmConfig:
    url: str | None = None
    model: str = "gpt-4o-mini"
    api_key: str | None = None
    timeout: float = 30.0

    @classmethod
    def from_env(cls, env: dict | None = None) -> "LlmConfig":
        env = env if env is not None else os.environ
        return cls(url=env.get("MATCHBENCH_LLM_URL") or None, api_key=env.get("MATCHBENCH_LLM_KEY") or None)

    @property
    def enabled(self) -> bool:
        return bool(self.url)


def llm_narrative(
    explanation: Explanation,
    cfg: LlmConfig,
    context: dict | None = None,
    client: httpx.Client | None = None,
) -> Explanation:
    """Ask a chat-completion endpoint for narrative text about an explanation.

    Disabled (no URL) is a quiet no-op. Endpoint failures record a warning
    and leave the criteria and diagnosis untouched; the narrative is never
    load-bearing.
    """
    if not cfg.enabled:
        return explanation

    body = {
        "model": cfg.model,
        "messages": [
            {
                "role": "system",
                "content": "You summarize schema-match evidence for a data curator. "
                "Explain the criterion scores and the overall diagnosis in plain language.",
            },
            {
                "role": "user",
                "content": json.dumps(
                    {"explanation": explanation.to_dict(), "context": context or {}},
                    sort_keys=True,
                ),
            },
        ],
    }
    headers = {}
    if cfg.api_key:
        headers["Authorization"] = f"Bearer {cfg.api_key}"

    try:
        if client is not None:
            response = client.post(cfg.url, json=body, headers=headers, timeout=cfg.timeout)
        else:
            response = httpx.post(cfg.url, json=body, headers=headers, timeout=cfg.timeout)
        response.raise_for_status()
        payload = response.json()
        explanation.narrative = payload["choices"][0]["message"]["content"]
    except Exception as exc:
        explanation.warning = f"narrative unavailable: {exc}"
    return explanation
