"""Tabular data model: nominal/numeric schema, CSV ingestion, partitioning, folds."""

from __future__ import annotations

import csv
import io
import logging
import os
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    AttributeKindError,
    EmptyInput,
    FoldError,
    MissingClassError,
    MissingValueError,
    ParseError,
    SchemaError,
    SchemaMismatch,
)

log = logging.getLogger(__name__)

MISSING_MARKER = "?"
NOMINAL = "nominal"
NUMERIC = "numeric"


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str = NOMINAL
    domain: tuple = ()

    def __post_init__(self):
        if not self.name:
            raise SchemaError("attribute names must be non-empty")
        if self.kind not in (NOMINAL, NUMERIC):
            raise SchemaError(f"unknown attribute kind {self.kind!r}")
        object.__setattr__(self, "domain", tuple(self.domain))
        if self.kind == NUMERIC and self.domain:
            raise SchemaError(f"numeric attribute {self.name!r} cannot carry a domain")
        if len(set(self.domain)) != len(self.domain):
            raise SchemaError(f"attribute {self.name!r} has duplicate labels")

    @property
    def is_nominal(self) -> bool:
        return self.kind == NOMINAL

    def describe(self) -> str:
        if self.is_nominal:
            return f"nominal {{{','.join(self.domain)}}}"
        return "numeric"


@dataclass(frozen=True)
class Schema:
    """Ordered attributes plus an optional class attribute.

    Nominal domains keep first-appearance order; ID3 relies on it for
    tie-breaking and for branch order when rendering trees.
    """

    attributes: tuple
    class_index: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        names = [a.name for a in self.attributes]
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            raise SchemaError(f"duplicate attribute names: {', '.join(dup)}")
        if self.class_index is not None:
            if not 0 <= self.class_index < len(self.attributes):
                raise SchemaError(f"class index {self.class_index} out of range")
            if not self.attributes[self.class_index].is_nominal:
                raise SchemaError("class attribute must be nominal")

    def __len__(self):
        return len(self.attributes)

    def __getitem__(self, key) -> Attribute:
        if isinstance(key, str):
            key = self.index(key)
        return self.attributes[key]

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def index(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise SchemaError(f"unknown attribute {name!r}")

    def resolve(self, key) -> int:
        """Accept an attribute name or a (possibly string) column index."""
        if isinstance(key, int):
            if not 0 <= key < len(self.attributes):
                raise SchemaError(f"column index {key} out of range")
            return key
        if key in self.names:
            return self.index(key)
        if isinstance(key, str) and key.lstrip("-").isdigit():
            return self.resolve(int(key))
        raise SchemaError(f"unknown attribute {key!r}")

    @property
    def class_attribute(self) -> Attribute:
        if self.class_index is None:
            raise SchemaError("no class attribute set")
        return self.attributes[self.class_index]

    @property
    def class_labels(self) -> tuple:
        return self.class_attribute.domain

    def with_class(self, key) -> Schema:
        return Schema(self.attributes, self.resolve(key))

    def predictors(self) -> list[int]:
        return [i for i in range(len(self.attributes)) if i != self.class_index]


@dataclass(frozen=True)
class ClassDistribution:
    labels: tuple
    counts: tuple

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.counts))

    def __getitem__(self, label):
        return self.counts[self.labels.index(label)]

    def majority(self):
        """Most frequent label; ties go to the earliest label in domain order."""
        best = max(self.counts)
        return self.labels[self.counts.index(best)]


@dataclass(frozen=True)
class Dataset:
    schema: Schema
    instances: tuple = field(default=())
    relation: str = "data"

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.instances)
        object.__setattr__(self, "instances", rows)
        arity = len(self.schema)
        for n, row in enumerate(rows):
            if len(row) != arity:
                raise SchemaError(f"instance {n} has {len(row)} values, schema has {arity}")
            for attr, v in zip(self.schema.attributes, row):
                if v is None:
                    continue
                if attr.is_nominal:
                    if v not in attr.domain:
                        raise SchemaError(f"instance {n}: {v!r} not in domain of {attr.name!r}")
                elif isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise SchemaError(f"instance {n}: {v!r} is not numeric for {attr.name!r}")

    def __len__(self):
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def column(self, key) -> list:
        i = self.schema.resolve(key)
        return [row[i] for row in self.instances]

    def subset(self, indices: Iterable[int]) -> Dataset:
        return Dataset(self.schema, [self.instances[i] for i in indices], self.relation)

    def with_instances(self, instances) -> Dataset:
        return Dataset(self.schema, instances, self.relation)

    def with_class(self, key) -> Dataset:
        return Dataset(self.schema.with_class(key), self.instances, self.relation)

    def project(self, names: Sequence[str]) -> Dataset:
        """Keep only the named attributes (in the given order); the class follows along."""
        idx = [self.schema.index(n) for n in names]
        cls = None
        if self.schema.class_index is not None:
            if self.schema.class_index not in idx:
                idx.append(self.schema.class_index)
            cls = idx.index(self.schema.class_index)
        schema = Schema([self.schema.attributes[i] for i in idx], cls)
        return Dataset(schema, [[row[i] for i in idx] for row in self.instances], self.relation)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return text.lower() not in ("nan", "inf", "-inf", "+inf", "infinity", "-infinity")


def _to_number(text: str):
    value = float(text)
    if value.is_integer() and "." not in text and "e" not in text.lower():
        return int(value)
    return value


def infer_schema(rows: Sequence[Sequence[str]], has_header: bool = True) -> Schema:
    """Column is numeric iff every non-missing cell parses as a decimal number.

    A column with no values at all (every cell ``?``) comes out nominal with
    an empty domain.
    """
    if not rows:
        raise EmptyInput("no rows")
    if has_header:
        names = [str(c).strip() for c in rows[0]]
        body = rows[1:]
    else:
        names = [f"col{i}" for i in range(len(rows[0]))]
        body = rows
    for i, n in enumerate(names):
        if not n:
            raise SchemaError(f"column {i} has an empty header name")
    attributes = []
    for i, name in enumerate(names):
        cells = [r[i] for r in body if r[i] != MISSING_MARKER]
        if cells and all(_is_number(c) for c in cells):
            attributes.append(Attribute(name, NUMERIC))
        else:
            attributes.append(Attribute(name, NOMINAL, tuple(dict.fromkeys(cells))))
    return Schema(attributes)


def _read_rows(source) -> list[list[str]]:
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            text = fh.read()
    else:
        data = source.read()
        text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    rows = []
    for row in csv.reader(io.StringIO(text)):
        cells = [c.strip() for c in row]
        if not any(cells):
            continue
        rows.append(cells)
    return rows


def _coerce(attr: Attribute, cell: str, rownum: int):
    if cell == MISSING_MARKER:
        return None
    if attr.is_nominal:
        return cell
    try:
        return _to_number(cell)
    except ValueError:
        raise ParseError(f"{cell!r} is not numeric for {attr.name!r}", rownum) from None


def load_csv(source, has_header: bool = True, class_column=None, relation: str | None = None) -> Dataset:
    """Read comma-separated text into a Dataset with an inferred schema.

    ``source`` may be a path, a binary stream or a text stream.
    """
    rows = _read_rows(source)
    if not rows:
        raise EmptyInput("input is empty")
    width = len(rows[0])
    for n, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", n)
    body = rows[1:] if has_header else rows
    if not body:
        raise EmptyInput("no data rows")
    schema = infer_schema(rows, has_header)
    first = 2 if has_header else 1
    instances = [
        [_coerce(a, c, first + n) for a, c in zip(schema.attributes, row)] for n, row in enumerate(body)
    ]
    if class_column is not None:
        schema = schema.with_class(class_column)
    if relation is None:
        relation = os.path.splitext(os.path.basename(str(source)))[0] if isinstance(source, (str, os.PathLike)) else "data"
    return Dataset(schema, instances, relation)


def load_csv_as(source, schema: Schema) -> Dataset:
    """Read CSV data against an existing schema (e.g. a trained model's).

    Columns are matched by header name and reordered to the schema; extra
    columns are dropped. The class column may be absent, in which case every
    class value is Missing. Nominal labels outside the schema domain become
    Missing, which makes the tree report them as unclassified.
    """
    rows = _read_rows(source)
    if not rows:
        raise EmptyInput("input is empty")
    header = rows[0]
    width = len(header)
    for n, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", n)
    wanted = schema.names
    optional = {schema.class_attribute.name} if schema.class_index is not None else set()
    missing = [n for n in wanted if n not in header and n not in optional]
    if missing:
        unexpected = [h for h in header if h not in wanted]
        raise SchemaMismatch(
            "data does not match model schema; missing: "
            + ", ".join(missing)
            + ("; unexpected: " + ", ".join(unexpected) if unexpected else ""),
            missing,
            unexpected,
        )
    positions = [header.index(n) if n in header else None for n in wanted]
    instances = []
    unseen = 0
    for n, row in enumerate(rows[1:], start=2):
        values = []
        for attr, pos in zip(schema.attributes, positions):
            v = None if pos is None else _coerce(attr, row[pos], n)
            if attr.is_nominal and v is not None and v not in attr.domain:
                unseen += 1
                v = None
            values.append(v)
        instances.append(values)
    if unseen:
        log.warning("%d value(s) outside the model's domains were read as missing", unseen)
    return Dataset(schema, instances, "test")


def _format_value(v) -> str:
    if v is None:
        return MISSING_MARKER
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def dump_csv(ds: Dataset) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(ds.schema.names)
    for row in ds.instances:
        writer.writerow([_format_value(v) for v in row])
    return out.getvalue()


def summary(ds: Dataset) -> str:
    """Relation summary: instance count and one line per attribute."""
    lines = [
        f"Relation:   {ds.relation}",
        f"Instances:  {len(ds)}",
        f"Attributes: {len(ds.schema)}",
    ]
    width = max(len(a.name) for a in ds.schema.attributes)
    for i, a in enumerate(ds.schema.attributes, start=1):
        kind = f"nominal ({len(a.domain)} values)" if a.is_nominal else "numeric"
        marker = "  [class]" if i - 1 == ds.schema.class_index else ""
        lines.append(f"  {i:>2} {a.name:<{width}}  {kind}{marker}")
    return "\n".join(lines) + "\n"


def class_distribution(ds: Dataset) -> ClassDistribution:
    attr = ds.schema.class_attribute
    ci = ds.schema.class_index
    counts = dict.fromkeys(attr.domain, 0)
    for n, row in enumerate(ds.instances):
        if row[ci] is None:
            raise MissingClassError(f"instance {n} has a missing class value")
        counts[row[ci]] += 1
    return ClassDistribution(attr.domain, tuple(counts.values()))


def _nominal_index(ds: Dataset, attribute) -> int:
    i = ds.schema.resolve(attribute)
    if not ds.schema.attributes[i].is_nominal:
        raise AttributeKindError(f"attribute {ds.schema.attributes[i].name!r} is numeric")
    return i


def partition_by(ds: Dataset, attribute) -> dict:
    """One sub-dataset per domain label, in domain order (empty ones included)."""
    i = _nominal_index(ds, attribute)
    groups = {label: [] for label in ds.schema.attributes[i].domain}
    for n, row in enumerate(ds.instances):
        if row[i] is None:
            raise MissingValueError(f"instance {n} is missing {ds.schema.attributes[i].name!r}")
        groups[row[i]].append(row)
    return {label: ds.with_instances(rows) for label, rows in groups.items()}


def stratified_fold_indices(ds: Dataset, k: int, seed: int = 0) -> list[list[int]]:
    """Indices of the k test folds.

    Instances are grouped by class, each group shuffled with a seeded
    generator, and the groups are dealt round-robin into folds with one
    running counter, so both per-class and total fold sizes differ by at
    most one.
    """
    if k < 2:
        raise FoldError("need at least 2 folds")
    if k > len(ds):
        raise FoldError(f"{k} folds requested for {len(ds)} instances")
    ci = ds.schema.class_index
    if ci is None:
        raise MissingClassError("stratification needs a class attribute")
    rng = random.Random(seed)
    groups = {label: [] for label in ds.schema.class_labels}
    for n, row in enumerate(ds.instances):
        if row[ci] is None:
            raise MissingClassError(f"instance {n} has a missing class value")
        groups[row[ci]].append(n)
    folds = [[] for _ in range(k)]
    slot = 0
    for members in groups.values():
        rng.shuffle(members)
        for n in members:
            folds[slot % k].append(n)
            slot += 1
    return [sorted(f) for f in folds]


def stratified_folds(ds: Dataset, k: int, seed: int = 0) -> list[tuple[Dataset, Dataset]]:
    out = []
    for test_idx in stratified_fold_indices(ds, k, seed):
        held = set(test_idx)
        train_idx = [n for n in range(len(ds)) if n not in held]
        out.append((ds.subset(train_idx), ds.subset(test_idx)))
    return out
