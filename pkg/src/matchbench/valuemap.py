"""One-to-one value mappings, affine unit-fix fitting, and dataset harmonization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoFitError, UnknownAttributeError, ValidationError
from .ingest import Attribute, Dataset
from .textutil import canonical, edit_similarity

DEFAULT_VALUE_THRESHOLD = 0.5


@dataclass
class ValueMapping:
    source_attr: str
    target_attr: str
    pairs: list[tuple[str, str, float]] = field(default_factory=list)  # (from, to, similarity)
    unmapped_source: list[str] = field(default_factory=list)
    transform: tuple[float, float] | None = None  # (scale, offset)

    def mapping(self) -> dict[str, str]:
        return {src: dst for src, dst, _ in self.pairs}

    def to_dict(self) -> dict:
        return {
            "source_attr": self.source_attr,
            "target_attr": self.target_attr,
            "pairs": [{"from": f, "to": t, "similarity": s} for f, t, s in self.pairs],
            "unmapped_source": self.unmapped_source,
            "transform": (
                {"scale": self.transform[0], "offset": self.transform[1]}
                if self.transform
                else None
            ),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ValueMapping":
        transform = d.get("transform")
        return cls(
            source_attr=d["source_attr"],
            target_attr=d["target_attr"],
            pairs=[(p["from"], p["to"], p.get("similarity", 1.0)) for p in d.get("pairs", [])],
            unmapped_source=list(d.get("unmapped_source", [])),
            transform=(transform["scale"], transform["offset"]) if transform else None,
        )


def propose_value_mapping(
    source_values: set[str],
    target_values: set[str],
    threshold: float = DEFAULT_VALUE_THRESHOLD,
    source_attr: str = "",
    target_attr: str = "",
) -> ValueMapping:
    """Greedy one-to-one alignment of unique values by fuzzy similarity.

    All cross pairs are ranked by (similarity desc, source asc, target asc)
    on canonicalized values; a pair is taken when both endpoints are still
    free and similarity clears the threshold. Leftover source values are
    reported as unmapped. Deterministic by the stated sort order.
    """
    if not source_values or not target_values:
        raise ValidationError("both value sets must be non-empty")

    ranked = sorted(
        (
            (edit_similarity(canonical(s), canonical(t)), s, t)
            for s in source_values
            for t in target_values
        ),
        key=lambda elt: (-elt[0], elt[1], elt[2]),
    )

    used_source: set[str] = set()
    used_target: set[str] = set()
    pairs: list[tuple[str, str, float]] = []
    for sim, s, t in ranked:
        if sim < threshold:
            break
        if s in used_source or t in used_target:
            continue
        pairs.append((s, t, sim))
        used_source.add(s)
        used_target.add(t)

    unmapped = sorted(v for v in source_values if v not in used_source)
    return ValueMapping(
        source_attr=source_attr,
        target_attr=target_attr,
        pairs=pairs,
        unmapped_source=unmapped,
    )


def fit_affine_transform(
    source_values: list[float],
    target_values: list[float],
    paired: bool = True,
) -> tuple[float, float, float]:
    """Least-squares fit target ~ scale * source + offset; returns (scale, offset, rmse).

    With paired=False (no row correspondence) both sides are matched by
    sorted order, interpolating the longer side's quantiles onto the
    shorter one. Constant source values admit no fit.
    """
    src = np.asarray(source_values, dtype=float)
    tgt = np.asarray(target_values, dtype=float)
    if src.size < 2 or np.unique(src).size < 2:
        raise NoFitError("need at least two distinct source values to fit a transform")
    if tgt.size < 2:
        raise NoFitError("need at least two target values to fit a transform")

    if paired:
        if src.size != tgt.size:
            raise ValidationError("paired fitting needs equal-length samples")
    else:
        src = np.sort(src)
        tgt = np.sort(tgt)
        n = min(src.size, tgt.size)
        quantiles = np.linspace(0.0, 1.0, n)
        if src.size != n:
            src = np.quantile(src, quantiles)
        if tgt.size != n:
            tgt = np.quantile(tgt, quantiles)

    design = np.column_stack([src, np.ones_like(src)])
    (scale, offset), *_ = np.linalg.lstsq(design, tgt, rcond=None)
    residuals = tgt - (scale * src + offset)
    rmse = float(np.sqrt(np.mean(residuals**2)))
    return float(scale), float(offset), rmse


def format_number(value: float) -> str:
    """Shortest decimal text that round-trips; integral floats drop the point."""
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def harmonize(
    dataset: Dataset,
    attribute_mappings: list[tuple[str, str]],
    value_mappings: dict[tuple[str, str], ValueMapping] | None = None,
    include_unmapped: bool = False,
) -> Dataset:
    """Rewrite the source dataset into the target schema.

    Output columns are named by target attributes in mapping order; value
    pairs rewrite cells (unmapped values pass through verbatim) and an affine
    transform, when present, applies to parseable numeric cells. With
    include_unmapped, untouched source columns are appended under their own
    names.
    """
    value_mappings = value_mappings or {}
    known = set(dataset.columns)
    for src, _ in attribute_mappings:
        if src not in known:
            raise UnknownAttributeError(f"mapping references unknown source attribute {src!r}")

    columns: dict[str, list[str]] = {}
    attributes: list[Attribute] = []
    for src, tgt in attribute_mappings:
        vm = value_mappings.get((src, tgt))
        rewritten = _rewrite_column(dataset.columns[src], vm)
        columns[tgt] = rewritten
        attributes.append(Attribute(name=tgt, inferred_type=dataset.attribute(src).inferred_type))

    if include_unmapped:
        mapped_sources = {src for src, _ in attribute_mappings}
        for attr in dataset.attributes:
            if attr.name not in mapped_sources and attr.name not in columns:
                columns[attr.name] = list(dataset.columns[attr.name])
                attributes.append(Attribute(name=attr.name, inferred_type=attr.inferred_type))

    return Dataset(side="target", attributes=attributes, columns=columns, row_count=dataset.row_count)


def _rewrite_column(values: list[str], vm: ValueMapping | None) -> list[str]:
    if vm is None:
        return list(values)
    lookup = vm.mapping()
    out = []
    for v in values:
        if v in lookup:
            out.append(lookup[v])
        elif vm.transform is not None:
            out.append(_apply_transform(v, vm.transform))
        else:
            out.append(v)
    return out


def _apply_transform(value: str, transform: tuple[float, float]) -> str:
    from .ingest import parse_number

    num = parse_number(value)
    if num is None:
        return value
    scale, offset = transform
    return format_number(scale * num + offset)
