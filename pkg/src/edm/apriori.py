"""Apriori frequent-itemset mining with support, confidence and cosine rule measures.

Two database forms are supported. A ``TransactionDB`` holds raw transactions.
A ``CountDB`` holds pre-aggregated occurrence counts (singletons, pairs and
optionally larger itemsets) together with the total pair-occurrence count
used as the support denominator. Itemsets missing from a CountDB count as 0.

Items are ordered by catalog position (declaration order), not alphabetically.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from typing import Iterable, Sequence

from .errors import ArgumentError, DegenerateError, ParseError


@dataclass(frozen=True)
class Itemset:
    items: tuple

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if not self.items:
            raise ArgumentError("an itemset cannot be empty")
        if len(set(self.items)) != len(self.items):
            raise ArgumentError(f"duplicate items in {self.items}")

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    @property
    def code(self) -> str:
        return "".join(self.items)

    @property
    def label(self) -> str:
        return ",".join(self.items)

    def __str__(self) -> str:
        return self.label


def make_itemset(codes: Iterable[str], catalog: Sequence[str]) -> Itemset:
    """Itemset from ``codes`` in catalog order; unknown codes raise ArgumentError."""
    pos = {c: i for i, c in enumerate(catalog)}
    codes = list(codes)
    for c in codes:
        if c not in pos:
            raise ArgumentError(f"item {c!r} is not in the catalog")
    return Itemset(sorted(codes, key=pos.__getitem__))


@dataclass(frozen=True)
class CountDB:
    catalog: tuple
    singleton_counts: dict
    pair_counts: dict  # frozenset({x, y}) -> count
    total_pair_count: int
    higher_counts: dict = field(default_factory=dict)  # frozenset -> count, size >= 3

    def __post_init__(self):
        object.__setattr__(self, "catalog", tuple(self.catalog))
        known = set(self.catalog)
        if len(known) != len(self.catalog):
            raise ArgumentError("duplicate item in catalog")
        for table in (self.singleton_counts, self.pair_counts, self.higher_counts):
            for key, n in table.items():
                items = {key} if isinstance(key, str) else set(key)
                if not items <= known:
                    raise ArgumentError(f"unknown item in {sorted(items)}")
                if n < 0:
                    raise ArgumentError(f"negative count for {sorted(items)}")
        if self.total_pair_count < 0:
            raise ArgumentError("total pair count must be >= 0")

    def count(self, itemset) -> int:
        items = frozenset(itemset)
        if len(items) == 1:
            return self.singleton_counts.get(next(iter(items)), 0)
        if len(items) == 2:
            return self.pair_counts.get(items, 0)
        return self.higher_counts.get(items, 0)


@dataclass(frozen=True)
class TransactionDB:
    transactions: tuple
    catalog: tuple = ()

    def __post_init__(self):
        txs = tuple(frozenset(t) for t in self.transactions)
        object.__setattr__(self, "transactions", txs)
        if not self.catalog:
            seen = {}
            for t in self.transactions:
                for item in sorted(t):
                    seen.setdefault(item, None)
            object.__setattr__(self, "catalog", tuple(seen))
        else:
            object.__setattr__(self, "catalog", tuple(self.catalog))
            known = set(self.catalog)
            for t in txs:
                if not t <= known:
                    raise ArgumentError(f"unknown items {sorted(t - known)}")

    def count(self, itemset) -> int:
        items = frozenset(itemset)
        return sum(1 for t in self.transactions if items <= t)


def aggregate(tdb: TransactionDB) -> CountDB:
    """Collapse transactions into per-itemset occurrence counts.

    The total pair count is the number of pair occurrences, matching the
    support denominator used for pre-aggregated data.
    """
    singles: dict = {}
    pairs: dict = {}
    higher: dict = {}
    for t in tdb.transactions:
        for item in t:
            singles[item] = singles.get(item, 0) + 1
        ordered = sorted(t, key=tdb.catalog.index)
        for size in range(2, len(ordered) + 1):
            table = pairs if size == 2 else higher
            for combo in combinations(ordered, size):
                key = frozenset(combo)
                table[key] = table.get(key, 0) + 1
    return CountDB(tdb.catalog, singles, pairs, sum(pairs.values()), higher)


# -- join / prune -----------------------------------------------------------


def candidate_join(level: Sequence[Itemset], catalog: Sequence[str]) -> list[Itemset]:
    """Merge k-itemsets sharing their first k-1 items into (k+1)-candidates."""
    level = list(level)
    if not level:
        return []
    k = len(level[0])
    if any(len(s) != k for s in level):
        raise ArgumentError("candidate_join needs itemsets of equal size")
    pos = {c: i for i, c in enumerate(catalog)}

    def key(s):
        return tuple(pos[i] for i in s.items)

    ordered = sorted(set(level), key=key)
    out = []
    for a_i, a in enumerate(ordered):
        for b in ordered[a_i + 1:]:
            if a.items[:-1] == b.items[:-1]:
                out.append(Itemset(a.items + (b.items[-1],)))
    return sorted(out, key=key)


def prune(candidates: Sequence[Itemset], previous: Iterable[Itemset]) -> list[Itemset]:
    """Keep candidates whose every (k-1)-subset is in ``previous``."""
    prev = {frozenset(s) for s in previous}
    return [c for c in candidates if all(frozenset(sub) in prev for sub in combinations(c.items, len(c) - 1))]


@dataclass(frozen=True)
class LevelTrace:
    k: int
    joined: tuple  # candidates straight from the join
    candidates: tuple  # (Itemset, count) after pruning
    frequent: tuple  # (Itemset, count) meeting the threshold


def apriori_trace(db, min_support_count: int) -> list[LevelTrace]:
    """Every join/prune/count/filter step, ending with the first empty level."""
    if min_support_count < 1:
        raise ArgumentError("min_support_count must be at least 1")
    catalog = db.catalog
    singles = [Itemset((c,)) for c in catalog]
    counted = tuple((s, db.count(s.items)) for s in singles)
    frequent = tuple((s, n) for s, n in counted if n >= min_support_count)
    steps = [LevelTrace(1, tuple(singles), counted, frequent)]
    k = 1
    while frequent:
        prev = [s for s, _ in frequent]
        joined = candidate_join(prev, catalog)
        kept = prune(joined, prev)
        counted = tuple((s, db.count(s.items)) for s in kept)
        frequent = tuple((s, n) for s, n in counted if n >= min_support_count)
        k += 1
        steps.append(LevelTrace(k, tuple(joined), counted, frequent))
    return steps


def frequent_itemsets(db, min_support_count: int) -> list[list[tuple[Itemset, int]]]:
    """Non-empty levels L1, L2, ... as lists of (itemset, count)."""
    return [list(step.frequent) for step in apriori_trace(db, min_support_count) if step.frequent]


def support_count_threshold(fraction: float, total: int) -> int:
    if not 0 < fraction <= 1:
        raise ArgumentError("support fraction must be in (0, 1]")
    return max(1, math.ceil(fraction * total - 1e-12))


# -- measures ---------------------------------------------------------------


def rule_support(pair_count: int, total_pair_count: int) -> float:
    if total_pair_count <= 0:
        raise DegenerateError("total pair count is zero")
    return pair_count / total_pair_count


def confidence(pair_count: int, antecedent_count: int) -> float:
    if antecedent_count <= 0:
        raise DegenerateError("antecedent never occurs")
    return pair_count / antecedent_count


def cosine(pair_count: int, count_x: int, count_y: int) -> float:
    if count_x <= 0 or count_y <= 0:
        raise DegenerateError("cosine needs both items to occur")
    return pair_count / math.sqrt(count_x * count_y)


@dataclass(frozen=True)
class AssociationRule:
    antecedent: Itemset
    consequent: Itemset
    support: float
    confidence: float
    cosine: float
    count: int = 0

    def __post_init__(self):
        if set(self.antecedent.items) & set(self.consequent.items):
            raise ArgumentError("antecedent and consequent overlap")

    @property
    def name(self) -> str:
        return f"{self.antecedent.code}->{self.consequent.code}"


def _as_counts(db) -> CountDB:
    return aggregate(db) if isinstance(db, TransactionDB) else db


def measure(db, x: str, y: str) -> AssociationRule:
    """The rule x -> y for two single items with all three measures."""
    counts = _as_counts(db)
    pair = counts.count((x, y))
    cx, cy = counts.count((x,)), counts.count((y,))
    return AssociationRule(
        Itemset((x,)), Itemset((y,)),
        rule_support(pair, counts.total_pair_count),
        confidence(pair, cx),
        cosine(pair, cx, cy),
        pair,
    )


def mine_rules(levels, db, min_confidence: float) -> list[AssociationRule]:
    """Both directions of every frequent pair, filtered and sorted by confidence.

    Ties are broken by the catalog positions of antecedent then consequent.
    """
    if not 0 <= min_confidence <= 1:
        raise ArgumentError("min_confidence must be in [0, 1]")
    counts = _as_counts(db)
    pos = {c: i for i, c in enumerate(counts.catalog)}
    rules = []
    pairs = levels[1] if len(levels) > 1 else []
    for itemset, _ in pairs:
        a, b = itemset.items
        for x, y in ((a, b), (b, a)):
            rule = measure(counts, x, y)
            if rule.confidence >= min_confidence - 1e-12:
                rules.append(rule)
    rules.sort(key=lambda r: (-r.confidence, pos[r.antecedent.items[0]], pos[r.consequent.items[0]]))
    return rules


def relations(db) -> list[tuple[str, str]]:
    """Every catalog pair as (later item, earlier item), in catalog pair order."""
    catalog = _as_counts(db).catalog
    return [(y, x) for x, y in combinations(catalog, 2)]


# -- file formats -----------------------------------------------------------

TOTAL_PAIRS = "TOTAL_PAIRS"


def read_count_db(source) -> CountDB:
    """Parse ``itemset,count`` rows (itemset codes joined by ``;``) plus ``TOTAL_PAIRS,n``.

    The catalog is the order in which singleton rows appear. ``#`` starts a comment.
    """
    text = _read_text(source)
    catalog, singles, pairs, higher = [], {}, {}, {}
    total = None
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 'itemset,count', got {len(row)} fields", row=lineno)
        key, raw = row[0].strip(), row[1].strip()
        if key.lower() == "itemset" and raw.lower() == "count":
            continue
        try:
            n = int(raw)
        except ValueError:
            raise ParseError(f"count {raw!r} is not an integer", row=lineno) from None
        if n < 0:
            raise ParseError("counts must be >= 0", row=lineno)
        if key == TOTAL_PAIRS:
            total = n
            continue
        items = [c.strip() for c in key.split(";") if c.strip()]
        if not items or len(set(items)) != len(items):
            raise ParseError(f"bad itemset {key!r}", row=lineno)
        if len(items) == 1:
            if items[0] in singles:
                raise ParseError(f"item {items[0]!r} listed twice", row=lineno)
            catalog.append(items[0])
            singles[items[0]] = n
            continue
        unknown = [c for c in items if c not in singles]
        if unknown:
            raise ParseError(f"items {unknown} must be declared as singletons first", row=lineno)
        table = pairs if len(items) == 2 else higher
        table[frozenset(items)] = n
    if not catalog:
        raise ParseError("no singleton counts found")
    if total is None:
        total = sum(pairs.values())
    return CountDB(tuple(catalog), singles, pairs, total, higher)


def read_transactions(source) -> TransactionDB:
    """One transaction per line, item codes separated by commas; blank lines are empty transactions."""
    text = _read_text(source)
    txs = []
    for line in text.splitlines():
        if line.lstrip().startswith("#"):
            continue
        txs.append([c.strip() for c in line.split(",") if c.strip()])
    return TransactionDB(txs)


def _read_text(source) -> str:
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    with open(source, encoding="utf-8") as fh:
        return fh.read()


def load_db(path):
    """CountDB when the file has ``TOTAL_PAIRS`` or integer counts, else transactions."""
    text = _read_text(path)
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
    is_counts = any(r[0].strip() == TOTAL_PAIRS for r in rows) or (
        rows and all(len(r) == 2 and r[1].strip().lstrip("-").isdigit() for r in rows[1:] or rows)
    )
    return read_count_db(io.StringIO(text)) if is_counts else read_transactions(io.StringIO(text))


def advertisement_counts() -> CountDB:
    text = resources.files("edm.data").joinpath("advertisement_counts.csv").read_text(encoding="utf-8")
    return read_count_db(io.StringIO(text))


# -- rendering --------------------------------------------------------------


def fmt_measure(x: float) -> str:
    """Two decimals, or three when that is exact (0.875, 0.375)."""
    if abs(x * 1000 - round(x * 1000)) < 1e-9 and round(x * 1000) % 10:
        return f"{x:.3f}"
    text = f"{x:.2f}"
    return "0" if float(text) == 0 else text


def fmt_truncated(x: float, places: int = 2) -> str:
    """Cut, not rounded, to ``places`` decimals (how cosine values are tabulated)."""
    scale = 10 ** places
    return f"{math.floor(x * scale + 1e-9) / scale:.{places}f}"


def _table(header: Sequence[str], rows: list[Sequence[str]]) -> str:
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def render_levels(trace: Sequence[LevelTrace], min_support_count: int) -> str:
    out = [f"Minimum support count: {min_support_count}", ""]
    for step in trace:
        if step.k > 1:
            out.append(f"C{step.k} joined: " + (" ".join(s.label for s in step.joined) or "(none)"))
        out.append(f"C{step.k} after pruning:")
        out.append(_table(("Code", "Support count"), [(s.label, n) for s, n in step.candidates]) if step.candidates
                   else "(empty)\n")
        out.append(f"L{step.k}:")
        out.append(_table(("Code", "Support count"), [(s.label, n) for s, n in step.frequent]) if step.frequent
                   else "(empty)\n")
    return "\n".join(out)


def render_rules(rules: Sequence[AssociationRule]) -> str:
    rows = [(r.name, r.count, fmt_measure(r.support), fmt_measure(r.confidence), fmt_truncated(r.cosine))
            for r in rules]
    return _table(("Rule", "Count", "Support", "Confidence", "Cosine"), rows)


def relation_table(db, pairs: Sequence[tuple[str, str]] | None = None) -> list[dict]:
    """Support, confidence and cosine for directed item pairs (all pairs by default)."""
    counts = _as_counts(db)
    out = []
    for x, y in pairs if pairs is not None else relations(counts):
        r = measure(counts, x, y)
        out.append({"relation": r.name, "count": r.count, "support": r.support,
                    "confidence": r.confidence if r.count else None, "cosine": r.cosine})
    return out


def render_relations(rows: Sequence[dict]) -> str:
    table = [(r["relation"], r["count"], fmt_measure(r["support"]),
              "-" if r["confidence"] is None else fmt_measure(r["confidence"]),
              fmt_truncated(r["cosine"])) for r in rows]
    return _table(("Relation", "Count", "Support", "Confidence", "Cosine"), table)


def result_document(trace: Sequence[LevelTrace], rules: Sequence[AssociationRule], min_support_count: int,
                    min_confidence: float) -> str:
    doc = {
        "min_support_count": min_support_count,
        "min_confidence": min_confidence,
        "levels": [
            {"k": s.k,
             "joined": [list(c.items) for c in s.joined],
             "candidates": [{"itemset": list(c.items), "count": n} for c, n in s.candidates],
             "frequent": [{"itemset": list(c.items), "count": n} for c, n in s.frequent]}
            for s in trace
        ],
        "rules": [
            {"antecedent": list(r.antecedent.items), "consequent": list(r.consequent.items), "count": r.count,
             "support": r.support, "confidence": r.confidence, "cosine": r.cosine}
            for r in rules
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
