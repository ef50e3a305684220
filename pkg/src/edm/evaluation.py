"""Classifier evaluation: confusion matrix, kappa, error statistics, per-class rates.

Counting conventions:

* the summary percentages (correct / incorrect / unclassified) use the total
  number of evaluated instances;
* everything else (per-class rates, kappa, weighted averages, error
  statistics, AUC) only looks at instances that received a prediction.

A prediction of ``None`` means "unclassified" (the instance reached a null
branch).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .dataset import Dataset, class_distribution, stratified_folds
from .errors import ArgumentError, DegenerateError
from .id3 import DecisionTree, build_tree, distribution_for, predict


@dataclass(frozen=True)
class ConfusionMatrix:
    labels: tuple
    cells: tuple  # cells[actual][predicted]
    unclassified: dict

    def _k(self, label) -> int:
        return self.labels.index(label)

    def row_sum(self, label) -> int:
        return sum(self.cells[self._k(label)])

    def col_sum(self, label) -> int:
        k = self._k(label)
        return sum(row[k] for row in self.cells)

    @property
    def trace(self) -> int:
        return sum(self.cells[k][k] for k in range(len(self.labels)))

    @property
    def classified(self) -> int:
        return sum(sum(row) for row in self.cells)

    @property
    def total(self) -> int:
        return self.classified + sum(self.unclassified.values())


def confusion_matrix(pairs, labels: Sequence[str] | None = None) -> ConfusionMatrix:
    """Tally (actual, predicted) pairs; predicted ``None`` goes to ``unclassified``."""
    pairs = list(pairs)
    if labels is None:
        seen = {}
        for actual, predicted in pairs:
            seen.setdefault(actual, None)
            if predicted is not None:
                seen.setdefault(predicted, None)
        labels = tuple(seen)
    labels = tuple(labels)
    pos = {label: k for k, label in enumerate(labels)}
    cells = [[0] * len(labels) for _ in labels]
    unclassified = dict.fromkeys(labels, 0)
    for actual, predicted in pairs:
        if actual not in pos:
            raise ArgumentError(f"actual label {actual!r} is not a known class")
        if predicted is None:
            unclassified[actual] += 1
        elif predicted not in pos:
            raise ArgumentError(f"predicted label {predicted!r} is not a known class")
        else:
            cells[pos[actual]][pos[predicted]] += 1
    return ConfusionMatrix(labels, tuple(tuple(r) for r in cells), unclassified)


@dataclass(frozen=True)
class PerClassMetrics:
    tp_rate: float
    fp_rate: float
    precision: float
    recall: float
    f_measure: float
    auc: float | None = None
    degenerate: frozenset = field(default_factory=frozenset)  # metrics that were 0/0


def _ratio(num, den, name, flags):
    if den == 0:
        flags.add(name)
        return 0.0
    return num / den


def per_class_metrics(cm: ConfusionMatrix, label, auc: float | None = None) -> PerClassMetrics:
    k = cm.labels.index(label)
    flags = set()
    hit = cm.cells[k][k]
    row = cm.row_sum(label)
    col = cm.col_sum(label)
    tp = _ratio(hit, row, "tp_rate", flags)
    fp = _ratio(col - hit, cm.classified - row, "fp_rate", flags)
    precision = _ratio(hit, col, "precision", flags)
    f = _ratio(2 * tp * precision, tp + precision, "f_measure", flags)
    if "tp_rate" in flags:
        flags.add("recall")
    return PerClassMetrics(tp, fp, precision, tp, f, auc, frozenset(flags))


def weighted_average(per_class: dict, weights: dict) -> PerClassMetrics:
    total = sum(weights[c] for c in per_class)
    if total <= 0:
        raise DegenerateError("weights sum to zero")

    def avg(name):
        return sum(getattr(m, name) * weights[c] for c, m in per_class.items()) / total

    with_auc = {c: m for c, m in per_class.items() if m.auc is not None}
    auc_weight = sum(weights[c] for c in with_auc)
    auc = sum(m.auc * weights[c] for c, m in with_auc.items()) / auc_weight if auc_weight > 0 else None
    return PerClassMetrics(
        avg("tp_rate"), avg("fp_rate"), avg("precision"), avg("recall"), avg("f_measure"), auc
    )


def kappa(cm: ConfusionMatrix) -> float:
    n = cm.classified
    if n == 0:
        raise DegenerateError("no classified instances")
    p_o = cm.trace / n
    p_e = sum(cm.row_sum(c) * cm.col_sum(c) for c in cm.labels) / (n * n)
    if p_e == 1:
        raise DegenerateError("chance agreement is 1; kappa undefined")
    return (p_o - p_e) / (1 - p_e)


@dataclass(frozen=True)
class ErrorStats:
    mae: float
    rmse: float
    rae: float  # percent
    rrse: float  # percent


def _index(actual, labels):
    """Class index of ``actual``; with no ``labels`` the actual is already an index."""
    if labels is None:
        return actual
    try:
        return labels.index(actual)
    except ValueError:
        raise ArgumentError(f"label {actual!r} is not a known class") from None


def error_stats(rows, prior: Sequence[float], labels: Sequence[str] | None = None) -> ErrorStats:
    """Probability-vector errors against one-hot actuals.

    MAE and RMSE are normalised by (rows x classes). RAE and RRSE compare
    against always predicting ``prior`` and are returned as percentages.
    Rows whose distribution is None (unclassified) are skipped.
    """
    if abs(sum(prior) - 1.0) > 1e-9:
        raise ArgumentError("prior must sum to 1")
    labels = tuple(labels) if labels is not None else None
    n = 0
    abs_err = sq_err = prior_abs = prior_sq = 0.0
    for actual, dist in rows:
        if dist is None:
            continue
        k = _index(actual, labels)
        y = [1.0 if j == k else 0.0 for j in range(len(prior))]
        n += 1
        for p, q, t in zip(dist, prior, y):
            abs_err += abs(p - t)
            sq_err += (p - t) ** 2
            prior_abs += abs(q - t)
            prior_sq += (q - t) ** 2
    if n == 0:
        raise DegenerateError("no classified rows")
    if prior_abs == 0 or prior_sq == 0:
        raise DegenerateError("prior predictor is perfect; relative errors undefined")
    cells = n * len(prior)
    return ErrorStats(
        abs_err / cells,
        math.sqrt(sq_err / cells),
        100.0 * abs_err / prior_abs,
        100.0 * math.sqrt(sq_err / prior_sq),
    )


def one_vs_rest_auc(rows, label, labels: Sequence[str] | None = None) -> float:
    """Mann-Whitney estimate of P(score_pos > score_neg), ties counted half."""
    labels = tuple(labels) if labels is not None else None
    k = _index(label, labels)
    scored = [(dist[k], _index(actual, labels) == k) for actual, dist in rows if dist is not None]
    n_pos = sum(1 for _, pos in scored if pos)
    n_neg = len(scored) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateError(f"AUC for {label!r} needs both positive and negative rows")
    scored.sort(key=lambda s: s[0])
    wins = 0.0
    negatives_below = 0
    i = 0
    while i < len(scored):
        j = i
        while j < len(scored) and scored[j][0] == scored[i][0]:
            j += 1
        group_pos = sum(1 for _, pos in scored[i:j] if pos)
        group_neg = (j - i) - group_pos
        wins += group_pos * (negatives_below + 0.5 * group_neg)
        negatives_below += group_neg
        i = j
    return wins / (n_pos * n_neg)


@dataclass
class EvaluationReport:
    mode: str
    matrix: ConfusionMatrix
    correct: int
    incorrect: int
    unclassified: int
    kappa: float | None
    mae: float | None
    rmse: float | None
    rae: float | None
    rrse: float | None
    per_class: dict
    weighted: PerClassMetrics | None

    @property
    def total(self) -> int:
        return self.correct + self.incorrect + self.unclassified

    def pct(self, count: int) -> float:
        return 100.0 * count / self.total if self.total else 0.0

    @property
    def pct_correct(self) -> float:
        return self.pct(self.correct)

    @property
    def pct_incorrect(self) -> float:
        return self.pct(self.incorrect)

    @property
    def pct_unclassified(self) -> float:
        return self.pct(self.unclassified)

    def to_dict(self) -> dict:
        def metrics(m):
            if m is None:
                return None
            d = asdict(m)
            d["degenerate"] = sorted(m.degenerate)
            return d

        return {
            "mode": self.mode,
            "summary": {
                "correct": self.correct,
                "correct_pct": self.pct_correct,
                "incorrect": self.incorrect,
                "incorrect_pct": self.pct_incorrect,
                "unclassified": self.unclassified,
                "unclassified_pct": self.pct_unclassified,
                "total": self.total,
                "kappa": self.kappa,
                "mean_absolute_error": self.mae,
                "root_mean_squared_error": self.rmse,
                "relative_absolute_error_pct": self.rae,
                "root_relative_squared_error_pct": self.rrse,
            },
            "per_class": {c: metrics(m) for c, m in self.per_class.items()},
            "weighted_average": metrics(self.weighted),
            "confusion_matrix": {
                "labels": list(self.matrix.labels),
                "cells": [list(r) for r in self.matrix.cells],
                "unclassified": self.matrix.unclassified,
            },
        }


def build_report(records, labels: Sequence[str], prior: Sequence[float], mode: str) -> EvaluationReport:
    """Assemble a report from (actual, predicted, distribution) records."""
    labels = tuple(labels)
    records = list(records)
    cm = confusion_matrix(((a, p) for a, p, _ in records), labels)
    correct = cm.trace
    incorrect = cm.classified - correct
    unclassified = sum(cm.unclassified.values())
    try:
        k = kappa(cm)
    except DegenerateError:
        k = None
    rows = [(a, d) for a, p, d in records if p is not None]
    try:
        err = error_stats(rows, prior, labels)
    except DegenerateError:
        err = None
    per_class = {}
    for c in labels:
        try:
            auc = one_vs_rest_auc(rows, c, labels)
        except DegenerateError:
            auc = None
        per_class[c] = per_class_metrics(cm, c, auc)
    weights = {c: cm.row_sum(c) for c in labels}
    try:
        weighted = weighted_average(per_class, weights)
    except DegenerateError:
        weighted = None
    return EvaluationReport(
        mode, cm, correct, incorrect, unclassified, k,
        err.mae if err else None, err.rmse if err else None,
        err.rae if err else None, err.rrse if err else None,
        per_class, weighted,
    )


def _prior(ds: Dataset) -> list[float]:
    dist = class_distribution(ds)
    if dist.total == 0:
        raise DegenerateError("empty dataset has no class prior")
    return [c / dist.total for c in dist.counts]


def _records(tree: DecisionTree, ds: Dataset):
    ci = ds.schema.class_index
    for row in ds.instances:
        yield row[ci], predict(tree, row), distribution_for(tree, row)


def evaluate_training(ds: Dataset, tree: DecisionTree, mode: str = "training set") -> EvaluationReport:
    """Predict every instance of ``ds``; the error baseline is ``ds``'s own class prior."""
    labeled = ds.with_instances([r for r in ds.instances if r[ds.schema.class_index] is not None])
    return build_report(_records(tree, labeled), tree.schema.class_labels, _prior(labeled), mode)


def cross_validate(ds: Dataset, k: int = 10, seed: int = 0) -> EvaluationReport:
    """Stratified k-fold CV; predictions from all folds are pooled in fold order."""
    records = []
    for train, test in stratified_folds(ds, k, seed):
        records.extend(_records(build_tree(train), test))
    return build_report(records, ds.schema.class_labels, _prior(ds), "stratified cross-validation")


def predict_file(tree: DecisionTree, test: Dataset) -> list[tuple[int, str | None, str | None]]:
    """(1-based index, actual or None, predicted or None) for every test instance."""
    ci = tree.schema.class_index
    return [(n, row[ci], predict(tree, row)) for n, row in enumerate(test.instances, start=1)]


# -- rendering --------------------------------------------------------------


def fmt_num(x: float | None, places: int = 4) -> str:
    """Fixed decimals with trailing zeros stripped; None renders as '?'."""
    if x is None:
        return "?"
    text = f"{x:.{places}f}"
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def render_report(report: EvaluationReport) -> str:
    heading = {"training set": "=== Evaluation on training set ===",
               "stratified cross-validation": "=== Stratified cross-validation ==="}.get(
        report.mode, f"=== Evaluation on {report.mode} ===")
    out = [heading, "=== Summary ===", ""]

    def line(label, value, pct=None):
        text = f"{label:<40}{value:>8}"
        if pct is not None:
            text += f"{fmt_num(pct):>16} %"
        out.append(text.rstrip())

    line("Correctly Classified Instances", str(report.correct), report.pct_correct)
    line("Incorrectly Classified Instances", str(report.incorrect), report.pct_incorrect)
    line("Kappa statistic", fmt_num(report.kappa))
    line("Mean absolute error", fmt_num(report.mae))
    line("Root mean squared error", fmt_num(report.rmse))
    rae = "?" if report.rae is None else fmt_num(report.rae) + " %"
    rrse = "?" if report.rrse is None else fmt_num(report.rrse) + " %"
    line("Relative absolute error", rae)
    line("Root relative squared error", rrse)
    line("UnClassified Instances", str(report.unclassified), report.pct_unclassified)
    line("Total Number of Instances", str(report.total))

    out += ["", "=== Detailed Accuracy By Class ===", ""]
    cols = ("TP Rate", "FP Rate", "Precision", "Recall", "F-Measure", "ROC Area")
    out.append(" " * 16 + "".join(f"{c:>11}" for c in cols) + "  Class")

    def metric_row(m):
        vals = (m.tp_rate, m.fp_rate, m.precision, m.recall, m.f_measure, m.auc)
        return "".join(f"{fmt_num(v, 3):>11}" for v in vals)

    for c, m in report.per_class.items():
        out.append(" " * 16 + metric_row(m) + f"  {c}")
    if report.weighted is not None:
        out.append(f"{'Weighted Avg.':<16}" + metric_row(report.weighted))

    out += ["", "=== Confusion Matrix ===", ""]
    cm = report.matrix
    letters = [_letter(k) for k in range(len(cm.labels))]
    width = max(3, max((len(str(v)) for r in cm.cells for v in r), default=1) + 1)
    out.append("".join(f"{x:>{width}}" for x in letters) + "   <-- classified as")
    for k, row in enumerate(cm.cells):
        out.append("".join(f"{v:>{width}}" for v in row) + f" | {letters[k]:>2} = {cm.labels[k]}")
    return "\n".join(out) + "\n"


def _letter(k: int) -> str:
    s = ""
    k += 1
    while k:
        k, r = divmod(k - 1, 26)
        s = chr(ord("a") + r) + s
    return s


def report_json(report: EvaluationReport) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"


def render_predictions(rows) -> str:
    lines = [f"{'inst#':>6} {'actual':>10} {'predicted':>10} error"]
    for n, actual, predicted in rows:
        a = "?" if actual is None else actual
        p = "?" if predicted is None else predicted
        err = "+" if actual is not None and predicted is not None and actual != predicted else ""
        lines.append(f"{n:>6} {a:>10} {p:>10} {err}".rstrip())
    return "\n".join(lines) + "\n"
