"""Pearson correlation with two-tailed significance, and nominal cross-tabulation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from .dataset import Dataset
from .errors import ArgumentError, AttributeKindError, DegenerateError, MissingValueError, SampleSizeError

# grade letters to numbers; F sits below E for the mathematics grade
GRADE_ENCODING = {"F": 0, "E": 1, "D": 2, "C": 3, "B": 4, "A": 5}

_EPS = 3e-16
_TINY = 1e-300


def _betacf(a: float, b: float, x: float, max_iter: int = 300) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise DegenerateError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ArgumentError("beta parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise ArgumentError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    # the continued fraction converges fast on this side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ArgumentError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_two_tailed: float
    n: int
    significant_at: float | None

    @property
    def t(self) -> float:
        if abs(self.r) >= 1:
            return math.copysign(math.inf, self.r)
        return self.r * math.sqrt((self.n - 2) / (1 - self.r * self.r))


def _level(p: float) -> float | None:
    if p < 0.01:
        return 0.01
    if p < 0.05:
        return 0.05
    return None


def pearson(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    n = len(x)
    if len(y) != n:
        raise ArgumentError(f"columns differ in length ({n} vs {len(y)})")
    if n < 3:
        raise SampleSizeError(f"need at least 3 pairs, got {n}")
    mx, my = math.fsum(x) / n, math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        raise DegenerateError("a constant column has no correlation")
    r = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1 - r * r))
        p = student_t_two_tailed(t, n - 2)
    return CorrelationResult(r, p, n, _level(p))


def parse_encoding(text: str) -> dict:
    """``"A=5,B=4"`` into a label -> number map."""
    mapping = {}
    for part in text.split(","):
        if not part.strip():
            continue
        label, sep, value = part.partition("=")
        if not sep:
            raise ArgumentError(f"encoding entry {part!r} is not label=number")
        try:
            mapping[label.strip()] = float(value)
        except ValueError:
            raise ArgumentError(f"encoding value {value!r} is not a number") from None
    if not mapping:
        raise ArgumentError("empty encoding")
    return mapping


def encode_column(values: Sequence, mapping: dict | None = None) -> list[float | None]:
    """Numbers pass through; labels go through ``mapping``; None stays None."""
    mapping = GRADE_ENCODING if mapping is None else mapping
    out = []
    unknown = set()
    for v in values:
        if v is None or isinstance(v, (int, float)):
            out.append(v)
        elif v in mapping:
            out.append(float(mapping[v]))
        else:
            unknown.add(v)
    if unknown:
        raise ArgumentError(f"no encoding for labels {sorted(unknown)}")
    return out


def alphabetical_encoding(values: Sequence) -> dict:
    """Labels numbered 1..k in sorted order, like an automatic recode."""
    labels = sorted({v for v in values if isinstance(v, str)})
    return {label: float(i) for i, label in enumerate(labels, start=1)}


def correlate_columns(ds: Dataset, a: str, b: str, mapping: dict | None = None) -> CorrelationResult:
    """Pearson r between two dataset columns, dropping rows missing either value."""
    x = encode_column(ds.column(a), mapping)
    y = encode_column(ds.column(b), mapping)
    pairs = [(u, v) for u, v in zip(x, y) if u is not None and v is not None]
    return pearson([u for u, _ in pairs], [v for _, v in pairs])


def _spss(x: float) -> str:
    text = f"{x:.3f}"
    if text.startswith("0."):
        return text[1:]
    if text.startswith("-0."):
        return "-" + text[2:]
    return text


def render_correlation(name_a: str, name_b: str, result: CorrelationResult) -> str:
    stars = {0.01: "**", 0.05: "*", None: ""}[result.significant_at]
    r = _spss(result.r) + stars
    p = _spss(result.p_two_tailed)
    left = max(len(name_a), len(name_b)) + 2
    mid = len("Pearson Correlation") + 2
    ca = max(len(name_a), 8) + 2
    cb = max(len(name_b), 8) + 2
    rows = [
        " " * (left + mid) + f"{name_a:>{ca}}{name_b:>{cb}}",
        f"{name_a:<{left}}{'Pearson Correlation':<{mid}}{'1':>{ca}}{r:>{cb}}",
        f"{'':<{left}}{'Sig. (2-tailed)':<{mid}}{'':>{ca}}{p:>{cb}}",
        f"{'':<{left}}{'N':<{mid}}{result.n:>{ca}}{result.n:>{cb}}",
        f"{name_b:<{left}}{'Pearson Correlation':<{mid}}{r:>{ca}}{'1':>{cb}}",
        f"{'':<{left}}{'Sig. (2-tailed)':<{mid}}{p:>{ca}}",
        f"{'':<{left}}{'N':<{mid}}{result.n:>{ca}}{result.n:>{cb}}",
    ]
    out = ["Correlations", ""] + [line.rstrip() for line in rows]
    if result.significant_at is not None:
        out += ["", f"{stars}. Correlation is significant at the {result.significant_at} level (2-tailed)."]
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class CrossTab:
    row_attribute: str
    col_attribute: str
    row_labels: tuple
    col_labels: tuple
    cells: tuple  # cells[row][col]

    def cell(self, row, col) -> int:
        return self.cells[self.row_labels.index(row)][self.col_labels.index(col)]

    def row_total(self, row) -> int:
        return sum(self.cells[self.row_labels.index(row)])

    def col_total(self, col) -> int:
        k = self.col_labels.index(col)
        return sum(r[k] for r in self.cells)

    @property
    def grand_total(self) -> int:
        return sum(sum(r) for r in self.cells)

    def transpose(self) -> "CrossTab":
        return CrossTab(self.col_attribute, self.row_attribute, self.col_labels, self.row_labels,
                        tuple(zip(*self.cells)) if self.cells else ())

    def to_dict(self) -> dict:
        return {
            "rows": self.row_attribute,
            "columns": self.col_attribute,
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "cells": [list(r) for r in self.cells],
            "row_totals": [self.row_total(r) for r in self.row_labels],
            "col_totals": [self.col_total(c) for c in self.col_labels],
            "total": self.grand_total,
        }


def _order(domain: tuple, order: Sequence | None, name: str) -> tuple:
    if order is None:
        return domain
    order = tuple(order)
    if sorted(order) != sorted(domain):
        raise ArgumentError(f"order for {name!r} must be a permutation of {list(domain)}")
    return order


def crosstab(ds: Dataset, row_attr: str, col_attr: str, row_order: Sequence | None = None,
             col_order: Sequence | None = None) -> CrossTab:
    """Counts of each (row value, column value) combination, labels in domain order."""
    attrs = []
    for name in (row_attr, col_attr):
        attr = ds.schema.attributes[ds.schema.index(name)]
        if not attr.is_nominal:
            raise AttributeKindError(f"attribute {attr.name!r} is numeric; cross-tabulation needs nominal columns")
        attrs.append(attr)
    rows = _order(attrs[0].domain, row_order, attrs[0].name)
    cols = _order(attrs[1].domain, col_order, attrs[1].name)
    ri, ci = ds.schema.index(row_attr), ds.schema.index(col_attr)
    counts = [[0] * len(cols) for _ in rows]
    rpos = {v: k for k, v in enumerate(rows)}
    cpos = {v: k for k, v in enumerate(cols)}
    for n, inst in enumerate(ds.instances, start=1):
        a, b = inst[ri], inst[ci]
        if a is None or b is None:
            raise MissingValueError(f"instance {n} has a missing value in the cross-tabulated columns")
        counts[rpos[a]][cpos[b]] += 1
    return CrossTab(attrs[0].name, attrs[1].name, rows, cols, tuple(tuple(r) for r in counts))


def render_crosstab(tab: CrossTab) -> str:
    width = max([len(str(x)) for x in (*tab.row_labels, "Total", tab.row_attribute)]) + 2
    cw = max([len(str(x)) for x in tab.col_labels] + [len(str(tab.grand_total)), 5]) + 2
    out = [f"{tab.row_attribute} * {tab.col_attribute} Crosstabulation", "Count",
           " " * width + tab.col_attribute,
           f"{tab.row_attribute:<{width}}" + "".join(f"{c:>{cw}}" for c in tab.col_labels) + f"{'Total':>{cw}}"]
    for label, row in zip(tab.row_labels, tab.cells):
        out.append(f"{label:<{width}}" + "".join(f"{v:>{cw}}" for v in row) + f"{sum(row):>{cw}}")
    out.append(f"{'Total':<{width}}" + "".join(f"{tab.col_total(c):>{cw}}" for c in tab.col_labels)
               + f"{tab.grand_total:>{cw}}")
    return "\n".join(line.rstrip() for line in out) + "\n"


def correlation_document(name_a: str, name_b: str, result: CorrelationResult, encoding: dict | None) -> str:
    return json.dumps({
        "x": name_a, "y": name_b, "r": result.r, "p_two_tailed": result.p_two_tailed,
        "n": result.n, "significant_at": result.significant_at, "encoding": encoding,
    }, indent=2) + "\n"
