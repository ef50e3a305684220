"""Rule-based placement grading from 10th, 12th and B.Tech percentages.

Percentages are banded as First (> 60), Second (> 45) and Third (> 35).
A percentage exactly on a boundary belongs to the lower band, so 60 is
Second and 45 is Third. The rule book maps a band triple to a final grade.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from importlib import resources

from .errors import NoRuleError, ParseError, RangeError

GRADES = ("Excellent", "Good", "Average")


class Band(enum.Enum):
    FIRST = "First"
    SECOND = "Second"
    THIRD = "Third"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "Band":
        for b in cls:
            if b.value.lower() == text.strip().lower():
                return b
        raise ValueError(f"unknown band {text!r}")


def band(pct: float) -> Band:
    if not 35 < pct <= 100:
        raise RangeError(f"percentage {pct} is outside the banded range (35, 100]")
    if pct > 60:
        return Band.FIRST
    if pct > 45:
        return Band.SECOND
    return Band.THIRD


@dataclass(frozen=True)
class RuleBook:
    rules: tuple  # ((b10, b12, btech), grade)

    def __post_init__(self):
        seen = set()
        for antecedent, _ in self.rules:
            if antecedent in seen:
                raise ParseError(f"duplicate rule for {'/'.join(map(str, antecedent))}")
            seen.add(antecedent)

    def lookup(self, b10: Band, b12: Band, btech: Band) -> str:
        for antecedent, grade in self.rules:
            if antecedent == (b10, b12, btech):
                return grade
        raise NoRuleError(f"no rule for 10th={b10}, 12th={b12}, B.Tech={btech}")


def parse_rulebook(text: str) -> RuleBook:
    """Read ``b10,b12,btech,grade`` lines; a header row and ``#`` comments are skipped."""
    rules = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        if [c.strip().lower() for c in row] == ["b10", "b12", "btech", "grade"]:
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 fields, got {len(row)}", row=lineno)
        try:
            antecedent = tuple(Band.parse(c) for c in row[:3])
        except ValueError as exc:
            raise ParseError(str(exc), row=lineno) from None
        grade = row[3].strip()
        if not grade:
            raise ParseError("empty grade", row=lineno)
        rules.append((antecedent, grade))
    return RuleBook(tuple(rules))


def load_rulebook(path=None) -> RuleBook:
    if path is None:
        text = resources.files("edm.data").joinpath("placement_rules.csv").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_rulebook(text)


_DEFAULT: RuleBook | None = None


def default_rulebook() -> RuleBook:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_rulebook()
    return _DEFAULT


def classify_placement(b10: Band, b12: Band, btech: Band, book: RuleBook | None = None) -> str:
    return (book or default_rulebook()).lookup(b10, b12, btech)
