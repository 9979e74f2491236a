from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchbench.engine import Candidate
from matchbench.errors import ValidationError
from matchbench.metrics import (
    GroundTruth,
    compute_metrics,
    consensus_sets,
    rank_breakdown,
    ranked_lists_from_candidates,
)

from .oracles import breakdown_ref, consensus_ref, metrics_ref


# ------------------------------------------------------------- ground truth


def test_ground_truth_rejects_overlap():
    gt = GroundTruth(accepted={("a", "x")}, rejected={("a", "x")})
    with pytest.raises(ValidationError):
        gt.validate()


def test_ground_truth_rejects_many_to_one():
    GroundTruth(accepted={("a", "x"), ("b", "y")}).validate()
    with pytest.raises(ValidationError):
        GroundTruth(accepted={("a", "x"), ("b", "x")}).validate()
    with pytest.raises(ValidationError):
        GroundTruth(accepted={("a", "x"), ("a", "y")}).validate()


# ------------------------------------------------------------- ranked lists


def test_ranked_lists_from_candidates():
    cands = [
        Candidate("s1", "t1", {"m1": 0.9, "m2": 0.1}),
        Candidate("s1", "t2", {"m1": 0.7}),
        Candidate("s1", "t3", {"m1": 0.0, "m2": 0.8}),
        Candidate("s2", "t1", {"m2": 0.4}),
    ]
    lists = ranked_lists_from_candidates(cands, ["m1", "m2"])
    assert lists["m1"] == {"s1": ["t1", "t2"]}  # zero score drops t3, s2 absent
    assert lists["m2"] == {"s1": ["t3", "t1"], "s2": ["t1"]}


def test_ranked_lists_tie_break_lexicographic():
    cands = [Candidate("s", "b", {"m": 0.5}), Candidate("s", "a", {"m": 0.5})]
    lists = ranked_lists_from_candidates(cands, ["m"])
    assert lists["m"]["s"] == ["a", "b"]


# ------------------------------------------------------------------ metrics


FIXTURE_LISTS = {
    "good": {"s1": ["t1", "t2"], "s2": ["t2"], "s3": ["t9"]},
    "weak": {"s1": ["t3", "t4", "t1"], "s2": []},
}
FIXTURE_GT = GroundTruth(accepted={("s1", "t1"), ("s2", "t2"), ("s3", "t3")})


def test_metrics_hand_computed_fixture():
    report = compute_metrics(FIXTURE_GT, FIXTURE_LISTS, k=10)
    good = report.per_matcher["good"]
    # ranks: s1->1, s2->1, s3 absent
    assert good.mrr == pytest.approx(2 / 3)
    assert good.precision_at_1 == pytest.approx(2 / 3)  # predicted on all 3 sources
    assert good.recall_at_k == pytest.approx(2 / 3)
    assert good.f1 == pytest.approx(2 / 3)
    weak = report.per_matcher["weak"]
    # ranks: s1->3, others absent; predicted only s1
    assert weak.mrr == pytest.approx(1 / 9)
    assert weak.precision_at_1 == 0.0
    assert weak.recall_at_k == pytest.approx(1 / 3)
    assert weak.f1 == 0.0


def test_metrics_match_reference_on_fixture():
    report = compute_metrics(FIXTURE_GT, FIXTURE_LISTS, k=10)
    expected = metrics_ref(FIXTURE_GT.accepted, FIXTURE_LISTS, k=10)
    for matcher, values in expected.items():
        got = report.per_matcher[matcher]
        assert got.mrr == pytest.approx(values["mrr"], abs=1e-12)
        assert got.precision_at_1 == pytest.approx(values["precision_at_1"], abs=1e-12)
        assert got.recall_at_k == pytest.approx(values["recall_at_k"], abs=1e-12)
        assert got.f1 == pytest.approx(values["f1"], abs=1e-12)


def test_metrics_insufficient_ground_truth_flag():
    report = compute_metrics(GroundTruth(), FIXTURE_LISTS, k=10)
    assert report.insufficient_ground_truth
    assert report.to_dict()["flag"] == "insufficient ground truth"
    assert all(mm.mrr == 0.0 for mm in report.per_matcher.values())


def test_metrics_recall_respects_k():
    lists = {"m": {"s1": ["x1", "x2", "x3", "t1"]}}
    gt = GroundTruth(accepted={("s1", "t1")})
    at_3 = compute_metrics(gt, lists, k=3).per_matcher["m"]
    at_4 = compute_metrics(gt, lists, k=4).per_matcher["m"]
    assert at_3.recall_at_k == 0.0
    assert at_4.recall_at_k == 1.0
    assert at_3.mrr == at_4.mrr == pytest.approx(0.25)  # MRR ignores k


def test_metrics_counts_pass_through():
    report = compute_metrics(FIXTURE_GT, FIXTURE_LISTS, k=10, trivial_accepts=2, manual_accepts=1)
    doc = report.to_dict()
    assert doc["trivial_accepts"] == 2
    assert doc["manual_accepts"] == 1
    assert doc["evaluated_sources"] == 3


# ---------------------------------------------------------------- breakdown


def test_breakdown_buckets_hand_fixture():
    lists = {"m": {"s1": ["t1"], "s2": ["x"] * 2 + ["t2"], "s3": ["x"] * 9 + ["t3"], "s4": ["x"] * 10 + ["t4"]}}
    gt = GroundTruth(accepted={("s1", "t1"), ("s2", "t2"), ("s3", "t3"), ("s4", "t4")})
    report = rank_breakdown(gt, lists)
    assert report.per_matcher["m"] == {"1": 1, "2-3": 1, "4-10": 1, "absent": 1}
    assert sum(report.per_matcher["m"].values()) == report.evaluated_sources


def test_breakdown_matches_reference():
    report = rank_breakdown(FIXTURE_GT, FIXTURE_LISTS)
    assert report.per_matcher == breakdown_ref(FIXTURE_GT.accepted, FIXTURE_LISTS)


# ---------------------------------------------------------------- consensus


def test_consensus_partitions_accepted_pairs():
    report = consensus_sets(FIXTURE_GT, FIXTURE_LISTS, k=10)
    counts = dict(report.subsets)
    # s1 found by both, s2 only by good, s3 by nobody
    assert counts[("good", "weak")] == 1
    assert counts[("good",)] == 1
    assert counts[()] == 1
    assert sum(counts.values()) == len(FIXTURE_GT.accepted)


def test_consensus_matches_reference():
    report = consensus_sets(FIXTURE_GT, FIXTURE_LISTS, k=10)
    expected = consensus_ref(FIXTURE_GT.accepted, FIXTURE_LISTS, k=10)
    assert dict(report.subsets) == expected


def test_consensus_respects_k():
    lists = {"m": {"s1": ["x", "t1"]}}
    gt = GroundTruth(accepted={("s1", "t1")})
    assert dict(consensus_sets(gt, lists, k=1).subsets) == {(): 1}
    assert dict(consensus_sets(gt, lists, k=2).subsets) == {("m",): 1}


# ------------------------------------------------------------ property view


@st.composite
def _gt_and_lists(draw):
    n_sources = draw(st.integers(1, 8))
    sources = [f"s{i}" for i in range(n_sources)]
    targets = [f"t{i}" for i in range(10)]
    accepted = {
        (s, targets[i])
        for i, s in enumerate(draw(st.permutations(sources)))
        if draw(st.booleans())
    }
    lists = {}
    for m in ("m1", "m2"):
        per_source = {}
        for s in sources:
            if draw(st.booleans()):
                per_source[s] = draw(
                    st.lists(st.sampled_from(targets), max_size=8, unique=True)
                )
        lists[m] = per_source
    return GroundTruth(accepted=accepted), lists


@settings(max_examples=80, deadline=None)
@given(_gt_and_lists())
def test_metrics_equal_reference_on_random_instances(case):
    gt, lists = case
    report = compute_metrics(gt, lists, k=5)
    expected = metrics_ref(gt.accepted, lists, k=5)
    for matcher, values in expected.items():
        got = report.per_matcher[matcher]
        for key, value in values.items():
            assert getattr(got, key) == pytest.approx(value, abs=1e-12)
    assert rank_breakdown(gt, lists).per_matcher == breakdown_ref(gt.accepted, lists)
    assert dict(consensus_sets(gt, lists, k=5).subsets) == consensus_ref(gt.accepted, lists, k=5)
