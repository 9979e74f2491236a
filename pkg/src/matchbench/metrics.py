"""Live matcher evaluation over curated ground truth: MRR, precision/recall/F1,
rank-bucket breakdowns, and cross-matcher consensus sets.

Only accepted pairs define relevance; rejected pairs feed weight adaptation
and exports but never enter the rank metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import Candidate
from .errors import ValidationError

RANK_BUCKETS = ("1", "2-3", "4-10", "absent")
INSUFFICIENT_GROUND_TRUTH = "insufficient ground truth"

# {matcher: {source: [target, ...]}} with each list best-first
RankedLists = dict[str, dict[str, list[str]]]


@dataclass
class GroundTruth:
    accepted: set[tuple[str, str]] = field(default_factory=set)
    rejected: set[tuple[str, str]] = field(default_factory=set)
    snapshot_seq: int = 0

    def validate(self) -> None:
        if self.accepted & self.rejected:
            raise ValidationError("accepted and rejected pairs must be disjoint")
        sources = [s for s, _ in self.accepted]
        targets = [t for _, t in self.accepted]
        if len(set(sources)) != len(sources) or len(set(targets)) != len(targets):
            raise ValidationError("accepted pairs must be one-to-one")


@dataclass
class MatcherMetrics:
    precision_at_1: float = 0.0
    recall_at_k: float = 0.0
    f1: float = 0.0
    mrr: float = 0.0

    def to_dict(self) -> dict:
        return {
            "precision_at_1": self.precision_at_1,
            "recall_at_k": self.recall_at_k,
            "f1": self.f1,
            "mrr": self.mrr,
        }


@dataclass
class MetricsReport:
    per_matcher: dict[str, MatcherMetrics]
    evaluated_sources: int
    k: int
    snapshot_seq: int = 0
    insufficient_ground_truth: bool = False
    trivial_accepts: int = 0
    manual_accepts: int = 0

    def to_dict(self) -> dict:
        doc = {
            "per_matcher": {m: mm.to_dict() for m, mm in self.per_matcher.items()},
            "evaluated_sources": self.evaluated_sources,
            "k": self.k,
            "snapshot_seq": self.snapshot_seq,
            "trivial_accepts": self.trivial_accepts,
            "manual_accepts": self.manual_accepts,
        }
        if self.insufficient_ground_truth:
            doc["flag"] = INSUFFICIENT_GROUND_TRUTH
        return doc


@dataclass
class ConsensusReport:
    subsets: list[tuple[tuple[str, ...], int]]
    k: int
    snapshot_seq: int = 0

    def to_dict(self) -> dict:
        return {
            "subsets": [{"matchers": list(ms), "count": c} for ms, c in self.subsets],
            "k": self.k,
            "snapshot_seq": self.snapshot_seq,
        }


@dataclass
class RankBreakdown:
    per_matcher: dict[str, dict[str, int]]
    evaluated_sources: int
    snapshot_seq: int = 0

    def to_dict(self) -> dict:
        return {
            "per_matcher": self.per_matcher,
            "buckets": list(RANK_BUCKETS),
            "evaluated_sources": self.evaluated_sources,
            "snapshot_seq": self.snapshot_seq,
        }


def ranked_lists_from_candidates(
    candidates: list[Candidate], matcher_ids: list[str]
) -> RankedLists:
    """Per-matcher best-first target lists rebuilt from candidate score maps.

    A matcher ranks exactly the candidates it scored above zero, ordered by
    its own score with lexicographic target tie-breaks.
    """
    lists: RankedLists = {m: {} for m in matcher_ids}
    by_source: dict[str, list[Candidate]] = {}
    for c in candidates:
        by_source.setdefault(c.source, []).append(c)
    for m in matcher_ids:
        for source, cands in by_source.items():
            scored = [(c.scores[m], c.target) for c in cands if c.scores.get(m, 0.0) > 0.0]
            scored.sort(key=lambda st: (-st[0], st[1]))
            if scored:
                lists[m][source] = [t for _, t in scored]
    return lists


def rank_of(ranked: RankedLists, matcher: str, source: str, target: str) -> int | None:
    lst = ranked.get(matcher, {}).get(source)
    if not lst:
        return None
    try:
        return lst.index(target) + 1
    except ValueError:
        return None


def compute_metrics(
    gt: GroundTruth,
    ranked: RankedLists,
    k: int = 10,
    trivial_accepts: int = 0,
    manual_accepts: int = 0,
) -> MetricsReport:
    """Per-matcher MRR, precision@1, recall@k, and their F1 over accepted pairs.

    For each source with an accepted target t*, a matcher's rank is the
    position of t* in its list (absent counts as infinite). MRR averages
    reciprocal ranks over all evaluated sources; precision@1 is taken over
    the sources where the matcher predicted anything; recall@k over all
    accepted pairs; F1 is the harmonic mean of the two (0 when both are 0).
    """
    gt.validate()
    accepted = sorted(gt.accepted)
    evaluated = len(accepted)
    report = MetricsReport(
        per_matcher={},
        evaluated_sources=evaluated,
        k=k,
        snapshot_seq=gt.snapshot_seq,
        insufficient_ground_truth=evaluated == 0,
        trivial_accepts=trivial_accepts,
        manual_accepts=manual_accepts,
    )
    for matcher in sorted(ranked):
        mm = MatcherMetrics()
        if evaluated:
            reciprocal_sum = 0.0
            top1 = 0
            within_k = 0
            predicted = 0
            for source, target in accepted:
                if ranked[matcher].get(source):
                    predicted += 1
                rank = rank_of(ranked, matcher, source, target)
                if rank is not None:
                    reciprocal_sum += 1.0 / rank
                    if rank == 1:
                        top1 += 1
                    if rank <= k:
                        within_k += 1
            mm.mrr = reciprocal_sum / evaluated
            mm.precision_at_1 = top1 / predicted if predicted else 0.0
            mm.recall_at_k = within_k / evaluated
            if mm.precision_at_1 + mm.recall_at_k > 0:
                mm.f1 = (
                    2 * mm.precision_at_1 * mm.recall_at_k / (mm.precision_at_1 + mm.recall_at_k)
                )
        report.per_matcher[matcher] = mm
    return report


def consensus_sets(gt: GroundTruth, ranked: RankedLists, k: int = 10) -> ConsensusReport:
    """Assign each accepted pair to the exact set of matchers ranking it within top-k.

    Subset counts partition the accepted pairs (the empty subset collects
    pairs no matcher found).
    """
    gt.validate()
    counts: dict[tuple[str, ...], int] = {}
    for source, target in sorted(gt.accepted):
        subset = tuple(
            sorted(
                m
                for m in ranked
                if (rank := rank_of(ranked, m, source, target)) is not None and rank <= k
            )
        )
        counts[subset] = counts.get(subset, 0) + 1
    ordered = sorted(counts.items(), key=lambda sc: (-sc[1], sc[0]))
    return ConsensusReport(subsets=ordered, k=k, snapshot_seq=gt.snapshot_seq)


def rank_breakdown(gt: GroundTruth, ranked: RankedLists) -> RankBreakdown:
    """Bucket each matcher's rank of the accepted target: 1, 2-3, 4-10, absent.

    Ranks beyond 10 land in "absent" (outside the interactive review window);
    bucket counts sum to the number of evaluated sources.
    """
    gt.validate()
    per_matcher: dict[str, dict[str, int]] = {}
    for matcher in sorted(ranked):
        buckets = {b: 0 for b in RANK_BUCKETS}
        for source, target in sorted(gt.accepted):
            rank = rank_of(ranked, matcher, source, target)
            buckets[_bucket(rank)] += 1
        per_matcher[matcher] = buckets
    return RankBreakdown(
        per_matcher=per_matcher,
        evaluated_sources=len(gt.accepted),
        snapshot_seq=gt.snapshot_seq,
    )


def _bucket(rank: int | None) -> str:
    if rank is None or rank > 10:
        return "absent"
    if rank == 1:
        return "1"
    if rank <= 3:
        return "2-3"
    return "4-10"
