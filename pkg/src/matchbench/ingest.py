"""CSV ingestion, attribute type inference, value profiling, and group inference.

Everything here is pure over an immutable dataset snapshot: loading the same
bytes yields the same profiles and ontology, byte for byte.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import date, datetime

from .errors import CsvParseError, UnknownAttributeError, ValidationError
from .textutil import canonicalize_name

NULL_TOKENS = frozenset({"", "na", "n/a", "null", "none"})
BOOLEAN_TOKENS = frozenset({"yes", "no", "true", "false", "0", "1"})
# float() happily parses these; they are not numeric evidence in a column
_NON_NUMERIC_FLOATS = frozenset({"nan", "inf", "-inf", "+inf", "infinity", "-infinity", "+infinity"})

NUMERIC_SHARE = 0.95
DATE_SHARE = 0.95
CATEGORICAL_MAX_DISTINCT = 20
CATEGORICAL_DISTINCT_SHARE = 0.05

TYPE_NUMERIC = "numeric"
TYPE_CATEGORICAL = "categorical"
TYPE_BOOLEAN = "boolean"
TYPE_DATE = "date"
TYPE_TEXT = "text"

CARDINALITY_CLASS = {
    TYPE_NUMERIC: "continuous",
    TYPE_CATEGORICAL: "enum",
    TYPE_BOOLEAN: "boolean",
    TYPE_DATE: "date",
    TYPE_TEXT: "free-text",
}


def is_null(value: str) -> bool:
    return value.strip().lower() in NULL_TOKENS


def parse_number(value: str) -> float | None:
    text = value.strip()
    if not text or text.lower() in _NON_NUMERIC_FLOATS:
        return None
    try:
        return float(text)
    except ValueError:
        return None


def _parses_as_date(value: str) -> bool:
    text = value.strip()
    try:
        date.fromisoformat(text)
        return True
    except ValueError:
        pass
    try:
        datetime.fromisoformat(text)
        return True
    except ValueError:
        return False


@dataclass
class Attribute:
    name: str
    description: str | None = None
    inferred_type: str = TYPE_TEXT
    group: str = "misc"
    distinct_count: int = 0
    null_fraction: float = 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "inferred_type": self.inferred_type,
            "group": self.group,
            "distinct_count": self.distinct_count,
            "null_fraction": self.null_fraction,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Attribute":
        return cls(**d)


@dataclass
class Dataset:
    side: str  # "source" | "target"
    attributes: list[Attribute]
    columns: dict[str, list[str]]
    row_count: int

    def attribute(self, name: str) -> Attribute:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        raise UnknownAttributeError(f"no attribute named {name!r} on the {self.side} side")

    def attribute_names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def to_dict(self) -> dict:
        return {
            "side": self.side,
            "attributes": [a.to_dict() for a in self.attributes],
            "columns": self.columns,
            "row_count": self.row_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Dataset":
        return cls(
            side=d["side"],
            attributes=[Attribute.from_dict(a) for a in d["attributes"]],
            columns={k: list(v) for k, v in d["columns"].items()},
            row_count=d["row_count"],
        )


@dataclass
class Profile:
    attribute: str
    inferred_type: str
    categorical_frequencies: list[tuple[str, int]] | None = None
    numeric_histogram: tuple[list[float], list[int]] | None = None
    minimum: float | None = None
    maximum: float | None = None
    sample_values: list[str] = field(default_factory=list)
    null_count: int = 0

    def to_dict(self) -> dict:
        return {
            "attribute": self.attribute,
            "inferred_type": self.inferred_type,
            "categorical_frequencies": (
                [[v, c] for v, c in self.categorical_frequencies]
                if self.categorical_frequencies is not None
                else None
            ),
            "numeric_histogram": (
                {"bin_edges": self.numeric_histogram[0], "counts": self.numeric_histogram[1]}
                if self.numeric_histogram is not None
                else None
            ),
            "min": self.minimum,
            "max": self.maximum,
            "sample_values": self.sample_values,
            "null_count": self.null_count,
        }


@dataclass
class Ontology:
    groups: list[tuple[str, list[str]]]
    properties: dict[str, dict[str, str]]

    def group_of(self, attribute: str) -> str:
        for label, members in self.groups:
            if attribute in members:
                return label
        raise UnknownAttributeError(f"no group membership for {attribute!r}")

    def to_dict(self) -> dict:
        return {
            "groups": [{"label": label, "members": members} for label, members in self.groups],
            "properties": self.properties,
        }


def load_csv(source, side: str) -> Dataset:
    """Load an RFC 4180 CSV (UTF-8, header row required) into a Dataset.

    Accepts a filesystem path, bytes, or a text/byte stream. Raises
    CsvParseError with a line number for structural problems and
    ValidationError for empty input or bad headers.
    """
    text = _as_text(source)
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        rows = list(reader)
    except csv.Error as exc:
        raise CsvParseError(str(exc), line=reader.line_num) from exc
    if not rows:
        raise ValidationError("empty CSV: a header row is required")

    header = [h.strip() for h in rows[0]]
    if any(not h for h in header):
        raise ValidationError("header names must be non-empty after trimming")
    seen = set()
    for h in header:
        if h in seen:
            raise ValidationError(f"duplicate header {h!r}")
        seen.add(h)

    data_rows = rows[1:]
    for line_no, row in enumerate(data_rows, start=2):
        if len(row) != len(header):
            raise CsvParseError(
                f"expected {len(header)} fields, found {len(row)}", line=line_no
            )

    columns: dict[str, list[str]] = {h: [] for h in header}
    for row in data_rows:
        for h, value in zip(header, row):
            columns[h].append(value)

    attributes = []
    for name in header:
        values = columns[name]
        non_null = [v for v in values if not is_null(v)]
        attributes.append(
            Attribute(
                name=name,
                inferred_type=infer_type(values),
                distinct_count=len({v.strip() for v in non_null}),
                null_fraction=(len(values) - len(non_null)) / len(values) if values else 0.0,
            )
        )
    return Dataset(side=side, attributes=attributes, columns=columns, row_count=len(data_rows))


def _as_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8-sig")
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8-sig") if isinstance(data, bytes) else data
    with open(source, "rb") as fh:  # str or os.PathLike path
        return fh.read().decode("utf-8-sig")


def infer_type(values: list[str]) -> str:
    """Deterministic type inference over raw cell texts.

    Precedence: boolean, numeric (>=95% parse), date (>=95% ISO-8601),
    categorical (distinct <= max(20, 5% of non-null)), text. All-null
    columns are text. Order of values never changes the outcome.
    """
    non_null = [v.strip() for v in values if not is_null(v)]
    if not non_null:
        return TYPE_TEXT

    lowered = {v.lower() for v in non_null}
    if len(lowered) <= 2 and lowered <= BOOLEAN_TOKENS:
        return TYPE_BOOLEAN

    n = len(non_null)
    numeric_hits = sum(1 for v in non_null if parse_number(v) is not None)
    if numeric_hits / n >= NUMERIC_SHARE:
        return TYPE_NUMERIC

    date_hits = sum(1 for v in non_null if _parses_as_date(v))
    if date_hits / n >= DATE_SHARE:
        return TYPE_DATE

    distinct = len(set(non_null))
    if distinct <= max(CATEGORICAL_MAX_DISTINCT, CATEGORICAL_DISTINCT_SHARE * n):
        return TYPE_CATEGORICAL
    return TYPE_TEXT


def numeric_values(dataset: Dataset, name: str) -> list[float]:
    """Parseable numeric cell values of a column, in row order."""
    out = []
    for v in dataset.columns[name]:
        if is_null(v):
            continue
        num = parse_number(v)
        if num is not None:
            out.append(num)
    return out


def histogram(values: list[float], bins: int) -> tuple[list[float], list[int]]:
    """Equal-width histogram over [min, max]; min == max degenerates to one bin.

    The last bin is closed so the maximum lands in it.
    """
    lo, hi = min(values), max(values)
    if lo == hi:
        return [lo, hi], [len(values)]
    width = (hi - lo) / bins
    edges = [lo + i * width for i in range(bins)] + [hi]
    counts = [0] * bins
    for v in values:
        idx = int((v - lo) / width)
        if idx >= bins:
            idx = bins - 1
        counts[idx] += 1
    return edges, counts


def profile_attribute(dataset: Dataset, name: str, bins: int = 10) -> Profile:
    """Compute the value profile backing inspection views and instance matchers.

    Numeric attributes get a binned histogram plus min/max; every other type
    gets exact frequency counts capped at the top 20 values plus an "other"
    bucket. Counts are exact over non-null values.
    """
    attr = dataset.attribute(name)
    values = dataset.columns[name]
    non_null = [v.strip() for v in values if not is_null(v)]
    null_count = len(values) - len(non_null)

    samples: list[str] = []
    seen = set()
    for v in non_null:
        if v not in seen:
            seen.add(v)
            samples.append(v)
        if len(samples) == 10:
            break

    profile = Profile(
        attribute=name,
        inferred_type=attr.inferred_type,
        sample_values=samples,
        null_count=null_count,
    )

    if attr.inferred_type == TYPE_NUMERIC:
        nums = [n for n in (parse_number(v) for v in non_null) if n is not None]
        if nums:
            edges, counts = histogram(nums, bins)
            profile.numeric_histogram = (edges, counts)
            profile.minimum = min(nums)
            profile.maximum = max(nums)
    else:
        counter: dict[str, int] = {}
        for v in non_null:
            counter[v] = counter.get(v, 0) + 1
        ranked = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
        top = ranked[:CATEGORICAL_MAX_DISTINCT]
        rest = sum(c for _, c in ranked[CATEGORICAL_MAX_DISTINCT:])
        freqs = [(v, c) for v, c in top]
        if rest > 0:
            freqs.append(("other", rest))
        profile.categorical_frequencies = freqs
    return profile


def profile_dataset(dataset: Dataset, bins: int = 10) -> dict[str, Profile]:
    return {a.name: profile_attribute(dataset, a.name, bins=bins) for a in dataset.attributes}


def infer_ontology(dataset: Dataset) -> Ontology:
    """Partition attributes into semantic groups by shared leading name token.

    A token heads a group only when at least two attributes share it; the
    rest fall into "misc". Deterministic for a given dataset.
    """
    leading: dict[str, list[str]] = {}
    for attr in dataset.attributes:
        _, toks = canonicalize_name(attr.name)
        key = toks[0] if toks else "misc"
        leading.setdefault(key, []).append(attr.name)

    grouped: dict[str, list[str]] = {}
    misc: list[str] = []
    for token, members in leading.items():
        if len(members) >= 2 or token == "misc":
            grouped.setdefault(token, []).extend(members)
        else:
            misc.extend(members)
    if misc:
        grouped.setdefault("misc", []).extend(misc)

    order = {name: i for i, name in enumerate(dataset.attribute_names())}
    groups: list[tuple[str, list[str]]] = []
    for label in sorted(grouped, key=lambda t: (t == "misc", t)):
        groups.append((label, sorted(grouped[label], key=order.__getitem__)))

    properties = {
        a.name: {
            "inferred_type": a.inferred_type,
            "cardinality_class": CARDINALITY_CLASS[a.inferred_type],
        }
        for a in dataset.attributes
    }
    return Ontology(groups=groups, properties=properties)


def assign_groups(dataset: Dataset, ontology: Ontology) -> None:
    """Copy ontology group labels onto the dataset's attributes."""
    for label, members in ontology.groups:
        for name in members:
            dataset.attribute(name).group = label


def apply_description_csv(dataset: Dataset, source) -> int:
    """Attach descriptions from a two-column CSV (attribute name, description).

    Unknown attribute names are skipped; returns the number applied.
    """
    text = _as_text(source)
    reader = csv.reader(io.StringIO(text, newline=""))
    applied = 0
    known = {a.name: a for a in dataset.attributes}
    for row in reader:
        if len(row) < 2:
            continue
        name, description = row[0].strip(), row[1]
        if name in known and description:
            known[name].description = description
            applied += 1
    return applied
