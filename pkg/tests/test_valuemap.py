from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchbench.errors import NoFitError, UnknownAttributeError, ValidationError
from matchbench.ingest import load_csv
from matchbench.textutil import canonical, edit_similarity
from matchbench.valuemap import (
    ValueMapping,
    fit_affine_transform,
    format_number,
    harmonize,
    propose_value_mapping,
)

from .conftest import csv_bytes
from .oracles import greedy_mapping_ref, two_point_affine_ref


def _sim(a: str, b: str) -> float:
    return edit_similarity(canonical(a), canonical(b))


# ---------------------------------------------------------------- proposals


def test_propose_yes_no_unknown_fixture():
    vm = propose_value_mapping(
        {"Yes", "No", "Unknown"},
        {"yes", "no", "not reported"},
        source_attr="smoking_status",
        target_attr="SmokingHistory",
    )
    mapping = vm.mapping()
    assert mapping["Yes"] == "yes"
    assert mapping["No"] == "no"
    targets = list(mapping.values())
    assert len(targets) == len(set(targets))  # one-to-one


def test_propose_matches_reference_greedy():
    source = ["Male", "Female", "Other", "Unknown"]
    target = ["male", "female", "unknown", "declined"]
    vm = propose_value_mapping(set(source), set(target), threshold=0.5)
    expected = greedy_mapping_ref(sorted(source), sorted(target), _sim, 0.5)
    assert sorted((s, t) for s, t, _ in vm.pairs) == sorted(expected)


def test_propose_threshold_excludes_weak_pairs():
    vm = propose_value_mapping({"alpha"}, {"zzz"}, threshold=0.5)
    assert vm.pairs == []
    assert vm.unmapped_source == ["alpha"]


def test_propose_one_to_one_under_competition():
    # both sources prefer "ab"; only the better one gets it
    vm = propose_value_mapping({"ab", "abc"}, {"ab", "abd"}, threshold=0.1)
    mapping = vm.mapping()
    assert mapping["ab"] == "ab"
    assert mapping["abc"] == "abd"


def test_propose_requires_values():
    with pytest.raises(ValidationError):
        propose_value_mapping(set(), {"x"})


def test_propose_deterministic_tie_breaks():
    # exact ties broken by source then target lexicographic order
    vm = propose_value_mapping({"aa", "ab"}, {"ac", "ad"}, threshold=0.1)
    assert (vm.pairs[0][0], vm.pairs[0][1]) == ("aa", "ac")


@settings(max_examples=50, deadline=None)
@given(
    source=st.sets(st.text(alphabet="abcdef", min_size=1, max_size=6), min_size=1, max_size=8),
    target=st.sets(st.text(alphabet="abcdef", min_size=1, max_size=6), min_size=1, max_size=8),
)
def test_propose_always_one_to_one(source, target):
    vm = propose_value_mapping(source, target, threshold=0.3)
    sources = [s for s, _, _ in vm.pairs]
    targets = [t for _, t, _ in vm.pairs]
    assert len(sources) == len(set(sources))
    assert len(targets) == len(set(targets))
    assert set(sources) | set(vm.unmapped_source) == source


# ------------------------------------------------------------------- affine


def test_affine_two_point_exact():
    scale, offset, rmse = fit_affine_transform([100.0, 200.0], [1.0, 2.0])
    expected = two_point_affine_ref(100.0, 1.0, 200.0, 2.0)
    assert scale == pytest.approx(expected[0], abs=1e-12)
    assert offset == pytest.approx(expected[1], abs=1e-12)
    assert rmse == pytest.approx(0.0, abs=1e-12)


def test_affine_recovers_known_line_with_noise_free_data():
    xs = [0.0, 1.0, 2.0, 3.0, 4.0]
    ys = [2.0 * x + 5.0 for x in xs]
    scale, offset, rmse = fit_affine_transform(xs, ys)
    assert scale == pytest.approx(2.0, abs=1e-9)
    assert offset == pytest.approx(5.0, abs=1e-9)
    assert rmse == pytest.approx(0.0, abs=1e-9)


def test_affine_unpaired_sorted_alignment():
    # unit conversion with shuffled samples (kg vs g): sorting aligns them
    kg = [80.0, 60.0, 70.0]
    g = [70000.0, 80000.0, 60000.0]
    scale, offset, rmse = fit_affine_transform(kg, g, paired=False)
    assert scale == pytest.approx(1000.0, rel=1e-9)
    assert offset == pytest.approx(0.0, abs=1e-6)
    assert rmse == pytest.approx(0.0, abs=1e-6)


def test_affine_unpaired_unequal_lengths_use_quantiles():
    # longer side interpolated at quantiles [0, .5, 1] -> [60000, 67500, 80000];
    # least squares against [60, 70, 80] gives slope 1000, offset -2500/3
    kg = [80.0, 60.0, 70.0]
    g = [70000.0, 80000.0, 60000.0, 65000.0]
    scale, offset, _ = fit_affine_transform(kg, g, paired=False)
    assert scale == pytest.approx(1000.0, rel=1e-9)
    assert offset == pytest.approx(-2500 / 3, rel=1e-9)


def test_affine_rejects_degenerate_input():
    with pytest.raises(NoFitError):
        fit_affine_transform([5.0, 5.0], [1.0, 2.0])
    with pytest.raises(NoFitError):
        fit_affine_transform([1.0], [2.0])
    with pytest.raises(ValidationError):
        fit_affine_transform([1.0, 2.0], [1.0, 2.0, 3.0], paired=True)


@settings(max_examples=50, deadline=None)
@given(
    scale=st.floats(min_value=-50, max_value=50).filter(lambda s: abs(s) > 1e-3),
    offset=st.floats(min_value=-100, max_value=100),
    xs=st.lists(
        st.floats(min_value=-1000, max_value=1000), min_size=2, max_size=20, unique=True
    ).filter(lambda xs: max(xs) - min(xs) > 1e-3),  # span must be resolvable in float64
)
def test_affine_roundtrips_exact_lines(scale, offset, xs):
    ys = [scale * x + offset for x in xs]
    got_scale, got_offset, rmse = fit_affine_transform(xs, ys)
    assert got_scale == pytest.approx(scale, rel=1e-6, abs=1e-6)
    assert got_offset == pytest.approx(offset, rel=1e-6, abs=1e-4)
    assert rmse < 1e-6 * max(1.0, max(abs(y) for y in ys))


# ----------------------------------------------------------------- numbers


@pytest.mark.parametrize(
    "value,text",
    [(1.0, "1"), (0.01, "0.01"), (-3.0, "-3"), (2.5, "2.5"), (1e17, "1e+17")],
)
def test_format_number(value, text):
    assert format_number(value) == text


# --------------------------------------------------------------- harmonize


def _clinical():
    return load_csv(
        csv_bytes(
            ["smoking_status", "weight"],
            [["Yes", "100"], ["No", "200"], ["Unknown", ""]],
        ),
        side="source",
    )


def test_harmonize_rewrites_values_and_passes_unmapped_through():
    vm = ValueMapping(
        "smoking_status", "SmokingHistory", pairs=[("Yes", "yes", 1.0), ("No", "no", 1.0)]
    )
    out = harmonize(
        _clinical(),
        [("smoking_status", "SmokingHistory")],
        {("smoking_status", "SmokingHistory"): vm},
    )
    assert out.attribute_names() == ["SmokingHistory"]
    assert out.columns["SmokingHistory"] == ["yes", "no", "Unknown"]


def test_harmonize_applies_affine_transform_to_numbers():
    vm = ValueMapping("weight", "WeightKg", transform=(0.01, 0.0))
    out = harmonize(_clinical(), [("weight", "WeightKg")], {("weight", "WeightKg"): vm})
    assert out.columns["WeightKg"] == ["1", "2", ""]  # blanks pass through


def test_harmonize_mapping_wins_over_transform():
    vm = ValueMapping("weight", "W", pairs=[("100", "one hundred", 1.0)], transform=(0.01, 0.0))
    out = harmonize(_clinical(), [("weight", "W")], {("weight", "W"): vm})
    assert out.columns["W"] == ["one hundred", "2", ""]


def test_harmonize_include_unmapped_appends_source_columns():
    out = harmonize(_clinical(), [("weight", "W")], include_unmapped=True)
    assert out.attribute_names() == ["W", "smoking_status"]
    assert out.columns["smoking_status"] == ["Yes", "No", "Unknown"]


def test_harmonize_unknown_source_attribute():
    with pytest.raises(UnknownAttributeError):
        harmonize(_clinical(), [("nope", "X")])


def test_harmonize_row_count_preserved():
    out = harmonize(_clinical(), [("weight", "W"), ("smoking_status", "S")])
    assert out.row_count == 3
    assert all(len(col) == 3 for col in out.columns.values())


# ------------------------------------------------------------ serialization


def test_value_mapping_dict_round_trip():
    vm = ValueMapping(
        "a",
        "b",
        pairs=[("x", "y", 0.9)],
        unmapped_source=["z"],
        transform=(2.0, -1.0),
    )
    again = ValueMapping.from_dict(vm.to_dict())
    assert again == vm
    assert ValueMapping.from_dict(ValueMapping("a", "b").to_dict()) == ValueMapping("a", "b")
