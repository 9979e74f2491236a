"""Independent reference implementations used as test oracles.

Everything here is written the naive, obviously-correct way (full-matrix DP,
brute-force loops, closed forms) and must stay independent of the package
internals: these functions define what the optimized code has to match.
"""

from __future__ import annotations

import math


def levenshtein_ref(a: str, b: str) -> int:
    """Full-matrix dynamic program, no optimizations."""
    rows, cols = len(a) + 1, len(b) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[-1][-1]


def edit_similarity_ref(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein_ref(a, b) / max(len(a), len(b))


def jaccard_ref(a: set, b: set) -> float:
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


# ---------------------------------------------------------------- rank metrics


def rank_in_list(ranked: list[str], target: str) -> int | None:
    for position, item in enumerate(ranked, start=1):
        if item == target:
            return position
    return None


def metrics_ref(accepted: set[tuple[str, str]], lists: dict[str, dict[str, list[str]]], k: int) -> dict:
    """Brute-force MRR / precision@1 / recall@k / F1 per matcher."""
    out = {}
    pairs = sorted(accepted)
    for matcher, per_source in lists.items():
        if not pairs:
            out[matcher] = {"mrr": 0.0, "precision_at_1": 0.0, "recall_at_k": 0.0, "f1": 0.0}
            continue
        rr_total = 0.0
        top1 = 0
        within = 0
        predicted = 0
        for source, target in pairs:
            lst = per_source.get(source, [])
            if lst:
                predicted += 1
            rank = rank_in_list(lst, target)
            if rank is not None:
                rr_total += 1.0 / rank
                if rank == 1:
                    top1 += 1
                if rank <= k:
                    within += 1
        mrr = rr_total / len(pairs)
        p1 = top1 / predicted if predicted else 0.0
        rk = within / len(pairs)
        f1 = 2 * p1 * rk / (p1 + rk) if (p1 + rk) > 0 else 0.0
        out[matcher] = {"mrr": mrr, "precision_at_1": p1, "recall_at_k": rk, "f1": f1}
    return out


def breakdown_ref(accepted: set[tuple[str, str]], lists: dict[str, dict[str, list[str]]]) -> dict:
    out = {}
    for matcher, per_source in lists.items():
        buckets = {"1": 0, "2-3": 0, "4-10": 0, "absent": 0}
        for source, target in sorted(accepted):
            rank = rank_in_list(per_source.get(source, []), target)
            if rank is None or rank > 10:
                buckets["absent"] += 1
            elif rank == 1:
                buckets["1"] += 1
            elif rank <= 3:
                buckets["2-3"] += 1
            else:
                buckets["4-10"] += 1
        out[matcher] = buckets
    return out


def consensus_ref(accepted: set[tuple[str, str]], lists: dict[str, dict[str, list[str]]], k: int) -> dict:
    counts: dict[tuple[str, ...], int] = {}
    for source, target in sorted(accepted):
        members = []
        for matcher, per_source in lists.items():
            rank = rank_in_list(per_source.get(source, []), target)
            if rank is not None and rank <= k:
                members.append(matcher)
        key = tuple(sorted(members))
        counts[key] = counts.get(key, 0) + 1
    return counts


# ------------------------------------------------------------- weight updates


def hedge_update_ref(weights: dict[str, float], rewards: dict[str, float], eta: float, sign: float) -> dict:
    """One multiplicative update, then renormalize."""
    raw = {m: w * math.exp(sign * eta * rewards.get(m, 0.0)) for m, w in weights.items()}
    total = sum(raw.values())
    return {m: w / total for m, w in raw.items()}


def simulate_accepts_ref(matcher_ranks: dict[str, int], n_accepts: int, eta: float, top_k: int = 10) -> dict:
    """Scripted evaluation of repeated accepts where each matcher has a fixed rank."""
    weights = {m: 1.0 / len(matcher_ranks) for m in matcher_ranks}
    for _ in range(n_accepts):
        rewards = {
            m: (1.0 / rank if rank <= top_k else 0.0) for m, rank in matcher_ranks.items()
        }
        weights = hedge_update_ref(weights, rewards, eta, sign=1.0)
    return weights


# ----------------------------------------------------------------- affine fit


def two_point_affine_ref(x1: float, y1: float, x2: float, y2: float) -> tuple[float, float]:
    """Closed-form line through two points."""
    scale = (y2 - y1) / (x2 - x1)
    offset = y1 - scale * x1
    return scale, offset


# ------------------------------------------------------------- greedy mapping


def greedy_mapping_ref(
    source_values: list[str],
    target_values: list[str],
    similarity,
    threshold: float,
) -> list[tuple[str, str]]:
    """Hand-rolled greedy one-to-one assignment with the documented tie-breaks."""
    ranked = sorted(
        ((similarity(s, t), s, t) for s in source_values for t in target_values),
        key=lambda e: (-e[0], e[1], e[2]),
    )
    used_s, used_t, pairs = set(), set(), []
    for sim, s, t in ranked:
        if sim < threshold:
            break
        if s in used_s or t in used_t:
            continue
        pairs.append((s, t))
        used_s.add(s)
        used_t.add(t)
    return pairs
