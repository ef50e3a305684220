"""Grade transformation: min-max normalization, threshold binning, percent bands.

The default pipeline turns the raw percentage columns of the MCA student
sheet into letter grades. Thresholds are applied literally with ``<=``
semantics; ``pipeline_percent_bands.json`` is the alternative that grades
straight from the raw percentage bands (A 80-89, B 70-79, ...).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

from .dataset import NOMINAL, Attribute, Dataset, Schema
from .errors import AttributeKindError, DegenerateColumn, EDMError, RangeError, SchemaError
from .id3 import information_gain

NA_TEXT = "not applicable"


@dataclass(frozen=True)
class BinSpec:
    """Cut points on the normalized scale; ``labels`` runs lowest band first."""

    thresholds: tuple
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != len(self.thresholds) + 1:
            raise SchemaError("a BinSpec needs exactly one more label than thresholds")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise SchemaError("thresholds must be strictly ascending")


@dataclass(frozen=True)
class GradeBands:
    """Inclusive integer percent ranges mapped to labels.

    Lookup picks the band with the largest lower bound not above the value,
    so fractional percents between two integer ranges fall into the lower one.
    """

    ranges: tuple
    na_label: str | None = None
    na_text: str = NA_TEXT

    def __post_init__(self):
        ranges = tuple(sorted((tuple(r) for r in self.ranges), key=lambda r: r[0]))
        object.__setattr__(self, "ranges", ranges)
        for (lo1, hi1, _), (lo2, _, _) in zip(ranges, ranges[1:]):
            if lo2 <= hi1:
                raise SchemaError("grade bands overlap")

    @property
    def labels(self) -> tuple:
        out = [label for _, _, label in reversed(self.ranges)]
        if self.na_label is not None and self.na_label not in out:
            out.append(self.na_label)
        return tuple(out)

    def label_for(self, raw):
        if isinstance(raw, str):
            text = raw.strip()
            if text == self.na_text:
                if self.na_label is None:
                    raise RangeError(f"{self.na_text!r} is not allowed here")
                return self.na_label
            try:
                raw = float(text)
            except ValueError:
                raise RangeError(f"{raw!r} is neither a percent nor {self.na_text!r}") from None
        lo, hi = self.ranges[0][0], self.ranges[-1][1]
        if not (lo <= raw <= hi) or (isinstance(raw, float) and math.isnan(raw)):
            raise RangeError(f"percent {raw} outside [{lo}, {hi}]")
        for band_lo, _, label in reversed(self.ranges):
            if raw >= band_lo:
                return label
        raise AssertionError("unreachable")


# 36-39 is not covered by the published bands; it falls to F with everything below.
MATH_BANDS = GradeBands(
    ((80, 100, "A"), (70, 79, "B"), (60, 69, "C"), (50, 59, "D"), (40, 49, "E"), (0, 39, "F")),
    na_label="F",
)


def min_max_normalize(column: Sequence[float], bounds: tuple | None = None) -> list[float]:
    """Map values affinely onto [0, 1] using the column extremes (or fixed ``bounds``)."""
    if not column:
        raise DegenerateColumn("empty column")
    lo, hi = bounds if bounds is not None else (min(column), max(column))
    if hi <= lo:
        raise DegenerateColumn(f"cannot normalize with min {lo} and max {hi}")
    span = hi - lo
    return [(v - lo) / span for v in column]


def bin_normalized(v: float, spec: BinSpec) -> str:
    if not 0.0 <= v <= 1.0:
        raise RangeError(f"normalized value {v} outside [0, 1]")
    i = sum(1 for t in spec.thresholds if t < v)
    return spec.labels[i]


def bin_math_grade(raw, bands: GradeBands = MATH_BANDS) -> str:
    return bands.label_for(raw)


@dataclass(frozen=True)
class ThresholdRule:
    spec: BinSpec
    normalize: bool = True
    bounds: tuple | None = None
    output: str | None = None


@dataclass(frozen=True)
class BandRule:
    bands: GradeBands
    output: str | None = None


@dataclass
class ColumnSummary:
    column: str
    output: str
    kind: str
    bounds: tuple | None = None
    counts: dict = field(default_factory=dict)

    def describe(self) -> str:
        parts = [f"{self.column} -> {self.output} ({self.kind})"]
        if self.bounds is not None:
            parts.append(f"min {self.bounds[0]:g} max {self.bounds[1]:g}")
        parts.append(" ".join(f"{k}:{v}" for k, v in self.counts.items()))
        return "; ".join(parts)


def _grade_column(ds: Dataset, i: int, rule) -> tuple[list, ColumnSummary]:
    attr = ds.schema.attributes[i]
    values = [row[i] for row in ds.instances]
    out_name = rule.output or attr.name
    present = [(n, v) for n, v in enumerate(values) if v is not None]
    graded = [None] * len(values)
    if isinstance(rule, ThresholdRule):
        if attr.is_nominal:
            raise AttributeKindError(f"column {attr.name!r} must be numeric for threshold binning")
        nums = [v for _, v in present]
        bounds = None
        if rule.normalize:
            bounds = rule.bounds if rule.bounds is not None else (min(nums), max(nums))
            try:
                nums = min_max_normalize(nums, bounds)
            except DegenerateColumn as exc:
                raise DegenerateColumn(f"column {attr.name!r}: {exc}") from None
        for (n, _), v in zip(present, nums):
            try:
                graded[n] = bin_normalized(v, rule.spec)
            except RangeError as exc:
                raise RangeError(f"column {attr.name!r} row {n + 1}: {exc}") from None
        summary = ColumnSummary(attr.name, out_name, "threshold", bounds)
    else:
        for n, v in present:
            try:
                graded[n] = rule.bands.label_for(v)
            except RangeError as exc:
                raise RangeError(f"column {attr.name!r} row {n + 1}: {exc}") from None
        summary = ColumnSummary(attr.name, out_name, "bands")
    for g in graded:
        if g is not None:
            summary.counts[g] = summary.counts.get(g, 0) + 1
    return graded, summary


def run_pipeline(ds: Dataset, config: dict) -> tuple[Dataset, list[ColumnSummary]]:
    """Apply ``config`` (column name -> rule) and report what each rule did.

    Graded columns are nominal with labels in first-appearance order, so
    writing the result out and reading it back yields the same schema.
    """
    attrs = list(ds.schema.attributes)
    columns = [list(c) for c in zip(*ds.instances)] if ds.instances else [[] for _ in attrs]
    summaries = []
    for name, rule in config.items():
        i = ds.schema.index(name)
        graded, summary = _grade_column(ds, i, rule)
        columns[i] = graded
        attrs[i] = Attribute(summary.output, NOMINAL, tuple(dict.fromkeys(g for g in graded if g is not None)))
        summaries.append(summary)
    class_index = ds.schema.class_index
    schema = Schema(attrs, class_index)
    rows = list(zip(*columns)) if ds.instances else []
    return Dataset(schema, rows, ds.relation), summaries


def grade_pipeline(ds: Dataset, config: dict) -> Dataset:
    return run_pipeline(ds, config)[0]


def parse_pipeline_config(doc: dict) -> dict:
    """Build a pipeline from its declarative form (see data/pipeline_default.json)."""
    config = {}
    try:
        entries = doc["columns"]
        for entry in entries:
            kind = entry.get("kind", "threshold")
            output = entry.get("output")
            if kind == "threshold":
                bounds = None
                if "min" in entry or "max" in entry:
                    bounds = (entry["min"], entry["max"])
                rule = ThresholdRule(
                    BinSpec(entry["thresholds"], entry["labels"]),
                    normalize=entry.get("normalize", True),
                    bounds=bounds,
                    output=output,
                )
            elif kind == "bands":
                rule = BandRule(
                    GradeBands(entry["bands"], entry.get("na_label"), entry.get("na_text", NA_TEXT)),
                    output=output,
                )
            else:
                raise SchemaError(f"unknown rule kind {kind!r}")
            config[entry["column"]] = rule
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed pipeline config: {exc}") from None
    return config


def load_pipeline_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"pipeline config is not valid JSON: {exc}") from None
    return parse_pipeline_config(doc)


def default_pipeline(name: str = "pipeline_default.json") -> dict:
    text = resources.files("edm.data").joinpath(name).read_text(encoding="utf-8")
    return parse_pipeline_config(json.loads(text))


def rank_attributes_by_gain(ds: Dataset) -> list[tuple[str, float]]:
    """Non-class attributes by descending information gain; ties keep schema order."""
    if ds.schema.class_index is None:
        raise SchemaError("ranking needs a class attribute")
    scored = []
    for i in ds.schema.predictors():
        attr = ds.schema.attributes[i]
        if not attr.is_nominal:
            raise AttributeKindError(f"attribute {attr.name!r} is numeric")
        scored.append((attr.name, information_gain(ds, attr.name)))
    # sorted() is stable, so equal gains stay in schema order
    return sorted(scored, key=lambda item: -item[1])


def select_top_k(ds: Dataset, k: int) -> Dataset:
    if k < 1:
        raise EDMError("must keep at least one attribute")
    ranked = rank_attributes_by_gain(ds)[:k]
    keep = {name for name, _ in ranked}
    names = [n for n in ds.schema.names if n in keep]
    return ds.project(names)
