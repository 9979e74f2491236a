"""Candidate generation, easy-match detection, and feedback-driven weight updates.

The ensemble is matcher-agnostic: built-ins run in process, external matchers
contribute score tables through the plugin host, and everything downstream
(aggregation, ranking, weight adaptation) only sees score tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import EngineError, UnknownCandidateError, ValidationError
from .ingest import Dataset
from .matchers import BUILTIN_MATCHER_IDS, AttributeView, build_views, score_table
from .textutil import edit_similarity

STATUS_SUGGESTED = "suggested"
STATUS_AUTO_ACCEPTED = "auto_accepted"
STATUS_ACCEPTED = "accepted"
STATUS_REJECTED = "rejected"
STATUS_FLAGGED = "flagged"


@dataclass
class MatcherSpec:
    id: str
    kind: str = "builtin"  # "builtin" | "external"
    command: list[str] | None = None
    top_k: int = 10
    status: str = "ready"  # "ready" | "running" | "failed"
    failure_reason: str | None = None

    def __post_init__(self):
        if self.kind == "builtin" and self.id not in BUILTIN_MATCHER_IDS:
            raise ValidationError(f"{self.id!r} is not a builtin matcher id")
        if self.kind == "external" and not self.command:
            raise ValidationError("external matchers need a launch command")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "command": self.command,
            "top_k": self.top_k,
            "status": self.status,
            "failure_reason": self.failure_reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MatcherSpec":
        return cls(**d)


@dataclass
class Candidate:
    source: str
    target: str
    scores: dict[str, float] = field(default_factory=dict)
    aggregate: float = 0.0
    status: str = STATUS_SUGGESTED
    note: str | None = None

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "scores": self.scores,
            "aggregate": self.aggregate,
            "status": self.status,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Candidate":
        return cls(**d)


@dataclass
class WeightVector:
    """Per-matcher ensemble weights, kept normalized to sum 1."""

    weights: dict[str, float]
    learning_rate: float = 0.1

    @classmethod
    def uniform(cls, matcher_ids, learning_rate: float = 0.1) -> "WeightVector":
        ids = list(matcher_ids)
        if not ids:
            raise ValidationError("weight vector needs at least one matcher")
        w = 1.0 / len(ids)
        return cls(weights={m: w for m in ids}, learning_rate=learning_rate)

    def normalized(self) -> "WeightVector":
        total = sum(self.weights.values())
        if total <= 0:
            raise ValidationError("weights must have positive mass")
        return WeightVector(
            weights={m: w / total for m, w in self.weights.items()},
            learning_rate=self.learning_rate,
        )

    def with_matcher(self, matcher_id: str) -> "WeightVector":
        """Add a matcher at the mean existing weight, then renormalize."""
        if matcher_id in self.weights:
            return self
        share = 1.0 / len(self.weights) if self.weights else 1.0
        weights = dict(self.weights)
        weights[matcher_id] = share
        return WeightVector(weights, self.learning_rate).normalized()

    def without_matcher(self, matcher_id: str) -> "WeightVector":
        weights = {m: w for m, w in self.weights.items() if m != matcher_id}
        return WeightVector(weights, self.learning_rate).normalized()

    def to_dict(self) -> dict:
        return {"weights": self.weights, "learning_rate": self.learning_rate}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightVector":
        return cls(weights=dict(d["weights"]), learning_rate=d["learning_rate"])


@dataclass
class EngineConfig:
    easy_threshold: float = 0.95
    display_cutoff: float = 0.4
    top_k: int = 10
    histogram_bins: int = 10
    plugin_timeout: float = 300.0

    def __post_init__(self):
        if not (0.0 < self.display_cutoff <= self.easy_threshold <= 1.0):
            raise ValidationError("require 0 < display_cutoff <= easy_threshold <= 1")
        if self.top_k < 1:
            raise ValidationError("top_k must be positive")

    def to_dict(self) -> dict:
        return {
            "easy_threshold": self.easy_threshold,
            "display_cutoff": self.display_cutoff,
            "top_k": self.top_k,
            "histogram_bins": self.histogram_bins,
            "plugin_timeout": self.plugin_timeout,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EngineConfig":
        return cls(**d)


ScoreTable = dict[str, dict[str, float]]


def aggregate_score(scores: dict[str, float], weights: WeightVector) -> float:
    """Weighted mean of per-matcher scores; matchers without a score count 0."""
    return sum(w * scores.get(m, 0.0) for m, w in weights.weights.items())


def detect_easy_matches(source: Dataset, target: Dataset, cfg: EngineConfig) -> list[Candidate]:
    """High-confidence auto-accepts: mutual unique best matches at or above the easy threshold.

    Equal canonical names always clear the threshold (similarity 1), but a
    pair only auto-accepts when each side is the other's strict best match,
    so an ambiguous name never auto-accepts and each attribute appears in at
    most one auto-accepted pair.
    """
    source_names = source.attribute_names()
    target_names = target.attribute_names()
    if not source_names or not target_names:
        return []

    from .textutil import canonical  # local import keeps module deps one-way

    s_canon = {n: canonical(n) for n in source_names}
    t_canon = {n: canonical(n) for n in target_names}

    sims = {
        (s, t): edit_similarity(s_canon[s], t_canon[t])
        for s in source_names
        for t in target_names
    }

    def unique_best(fixed: str, others: list[str], lookup) -> str | None:
        best_name, best_sim, tied = None, -1.0, False
        for other in others:
            sim = lookup(fixed, other)
            if sim > best_sim:
                best_name, best_sim, tied = other, sim, False
            elif sim == best_sim:
                tied = True
        return best_name if not tied else None

    best_target = {s: unique_best(s, target_names, lambda s_, t_: sims[(s_, t_)]) for s in source_names}
    best_source = {t: unique_best(t, source_names, lambda t_, s_: sims[(s_, t_)]) for t in target_names}

    matches = []
    for s in source_names:
        t = best_target[s]
        if t is None or best_source[t] != s:
            continue
        sim = sims[(s, t)]
        if sim >= cfg.easy_threshold:
            matches.append(
                Candidate(source=s, target=t, scores={"name_edit": sim}, status=STATUS_AUTO_ACCEPTED)
            )
    return matches


def top_k_targets(table_row: dict[str, float], k: int) -> list[str]:
    """A matcher's ranked proposals for one source: positive scores only, best first."""
    ranked = sorted(
        ((t, s) for t, s in table_row.items() if s > 0.0),
        key=lambda ts: (-ts[1], ts[0]),
    )
    return [t for t, _ in ranked[:k]]


def assemble_candidates(
    tables: dict[str, ScoreTable],
    weights: WeightVector,
    source_order: list[str],
    top_k: int,
) -> list[Candidate]:
    """Union of every matcher's top-k proposals with full score maps attached.

    Per-source lists come out sorted by aggregate descending with lexicographic
    target tie-breaks, so fixed inputs yield byte-identical candidate lists.
    """
    candidates: list[Candidate] = []
    for s in source_order:
        proposed: set[str] = set()
        for table in tables.values():
            row = table.get(s)
            if row:
                proposed.update(top_k_targets(row, top_k))
        per_source = []
        for t in proposed:
            scores = {}
            for matcher_id, table in tables.items():
                row = table.get(s)
                if row is not None and t in row:
                    scores[matcher_id] = row[t]
            per_source.append(
                Candidate(source=s, target=t, scores=scores, aggregate=aggregate_score(scores, weights))
            )
        per_source.sort(key=lambda c: (-c.aggregate, c.target))
        candidates.extend(per_source)
    return candidates


def generate_candidates(
    source: Dataset,
    target: Dataset,
    matchers: list[MatcherSpec],
    weights: WeightVector,
    cfg: EngineConfig,
    views: tuple[dict[str, AttributeView], dict[str, AttributeView]] | None = None,
) -> tuple[list[Candidate], list[MatcherSpec]]:
    """Run the ensemble and return (ranked candidates, updated matcher specs).

    Failed matchers are excluded from aggregation and come back with status
    "failed" and a reason; if every matcher fails the engine raises instead.
    """
    if not matchers:
        raise ValidationError("at least one matcher is required")
    source_views, target_views = views if views else (build_views(source), build_views(target))

    tables: dict[str, ScoreTable] = {}
    failures: dict[str, str] = {}
    updated: list[MatcherSpec] = []
    for spec in matchers:
        if spec.kind == "builtin":
            tables[spec.id] = score_table(spec.id, source_views, target_views)
            spec.status = "ready"
            spec.failure_reason = None
        else:
            from .plugin_host import run_external_matcher

            try:
                tables[spec.id] = run_external_matcher(
                    spec, source_views, target_views, timeout=cfg.plugin_timeout
                )
                spec.status = "ready"
                spec.failure_reason = None
            except Exception as exc:  # protocol violations, spawn errors, timeouts
                spec.status = "failed"
                spec.failure_reason = str(exc)
                failures[spec.id] = str(exc)
        updated.append(spec)

    if not tables:
        raise EngineError(failures)

    ready_weights = WeightVector(
        {m: w for m, w in weights.weights.items() if m in tables}, weights.learning_rate
    ).normalized()
    candidates = assemble_candidates(tables, ready_weights, source.attribute_names(), cfg.top_k)
    return candidates, updated


def matcher_rank(
    candidates: list[Candidate], matcher_id: str, source: str, target: str
) -> int | None:
    """1-based rank of (source, target) in a matcher's per-source ranking, or None.

    The ranking covers candidates the matcher scored above zero, ordered by
    score descending with lexicographic target tie-breaks.
    """
    ranked = sorted(
        (
            (c.scores[matcher_id], c.target)
            for c in candidates
            if c.source == source and c.scores.get(matcher_id, 0.0) > 0.0
        ),
        key=lambda st: (-st[0], st[1]),
    )
    for position, (_, t) in enumerate(ranked, start=1):
        if t == target:
            return position
    return None


def update_weights(
    weights: WeightVector,
    decision: str,
    pair: tuple[str, str],
    candidates: list[Candidate],
    top_k: int = 10,
) -> WeightVector:
    """Hedge-style multiplicative update from one manual accept/reject.

    Each matcher earns reciprocal-rank reward 1/rank when it placed the pair
    in its per-source top-k (0 otherwise); accepted pairs multiply weights by
    exp(lr * reward), rejected by exp(-lr * reward), then the vector is
    renormalized. Equal rewards leave the vector unchanged.
    """
    if decision not in ("accept", "reject"):
        raise ValidationError(f"decision must be accept or reject, got {decision!r}")
    source, target = pair
    if not any(c.source == source and c.target == target for c in candidates):
        raise UnknownCandidateError(f"no candidate for pair ({source!r}, {target!r})")

    sign = 1.0 if decision == "accept" else -1.0
    eta = weights.learning_rate
    new_weights = {}
    for matcher_id, w in weights.weights.items():
        rank = matcher_rank(candidates, matcher_id, source, target)
        reward = 1.0 / rank if rank is not None and rank <= top_k else 0.0
        new_weights[matcher_id] = w * math.exp(sign * eta * reward)
    return WeightVector(new_weights, eta).normalized()


def merge_matcher_scores(
    candidates: list[Candidate],
    matcher_id: str,
    table: ScoreTable,
    weights: WeightVector,
    source_order: list[str],
    top_k: int,
) -> list[Candidate]:
    """Merge one matcher's score table into an existing candidate set.

    Existing pairs gain the matcher's score; the matcher's own top-k proposals
    not already present join as fresh suggestions. Decisions on existing
    candidates are untouched; aggregates are recomputed against the weights.
    """
    by_pair = {(c.source, c.target): c for c in candidates}
    for s, row in table.items():
        for t in top_k_targets(row, top_k):
            if (s, t) not in by_pair:
                by_pair[(s, t)] = Candidate(source=s, target=t, scores={})
    for (s, t), cand in by_pair.items():
        row = table.get(s)
        if row is not None and t in row:
            cand.scores[matcher_id] = row[t]
        cand.aggregate = aggregate_score(cand.scores, weights)

    order = {name: i for i, name in enumerate(source_order)}
    merged = list(by_pair.values())
    merged.sort(key=lambda c: (order.get(c.source, len(order)), -c.aggregate, c.target))
    return merged


def remove_matcher_scores(
    candidates: list[Candidate],
    matcher_id: str,
    weights: WeightVector,
    source_order: list[str],
) -> list[Candidate]:
    """Drop a matcher's scores; candidates it alone proposed stay unless undecided and unscored."""
    kept = []
    for c in candidates:
        c.scores.pop(matcher_id, None)
        if not c.scores and c.status == STATUS_SUGGESTED:
            continue
        c.aggregate = aggregate_score(c.scores, weights)
        kept.append(c)
    order = {name: i for i, name in enumerate(source_order)}
    kept.sort(key=lambda c: (order.get(c.source, len(order)), -c.aggregate, c.target))
    return kept
