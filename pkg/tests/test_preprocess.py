import io
import math

import pytest
from hypothesis import given
from hypothesis import strategies as hs

from conftest import RAW_SAMPLE
from edm.dataset import Attribute, Dataset, NOMINAL, Schema, dump_csv, load_csv
from edm.errors import AttributeKindError, DegenerateColumn, RangeError, SchemaError
from edm.preprocess import (MATH_BANDS, BinSpec, GradeBands, ThresholdRule, bin_math_grade, bin_normalized,
                            default_pipeline, grade_pipeline, load_pipeline_config, min_max_normalize,
                            parse_pipeline_config, rank_attributes_by_gain, run_pipeline, select_top_k)

XII = BinSpec((0, 0.25, 0.487, 0.75), "EDCBA")
UG = BinSpec((0, 0.11, 0.41, 0.70), "EDCBA")
PG = BinSpec((0, 0.23, 0.46, 0.74), "EDCBA")

# Published transformation of the 24-row sample: (math, xii norm, xii, ug norm, ug, pg norm, pg)
PUBLISHED = [
    ("F", 0.45, "C", 0.529411765, "B", 0.153846154, "D"),
    ("A", 0.7, "B", 0.411764706, "C", 0.923076923, "A"),
    ("A", 0.7, "B", 0.676470588, "B", 0.564102564, "B"),
    ("A", 0.725, "B", 0.382352941, "C", 0.974358974, "A"),
    ("A", 1, "A", 0.264705882, "C", 0.743589744, "B"),
    ("F", 0.975, "A", 0.5, "B", 0.256410256, "C"),
    ("F", 0.25, "D", 0.176470588, "C", 0.282051282, "C"),
    ("B", 0.725, "B", 0.705882353, "B", 0.769230769, "A"),
    ("C", 0.45, "C", 0.647058824, "B", 1, "A"),
    ("B", 0.7, "B", 0.647058824, "B", 0.846153846, "A"),
    ("F", 0.45, "C", 0.558823529, "B", 0.230769231, "D"),
    ("C", 0.15, "D", 0.352941176, "C", 0.435897436, "C"),
    ("B", 0.7, "B", 0.588235294, "B", 0.41025641, "C"),
    ("B", 0.675, "B", 1, "A", 0.461538462, "C"),
    ("B", 0.7, "B", 0.23529412, "C", 0.692307692, "B"),
    ("B", 0.725, "B", 0.676470588, "B", 0.743589744, "B"),
    ("B", 0.75, "B", 0.352941176, "C", 0.333333333, "C"),
    ("B", 0.7, "B", 0.617647059, "B", 0.743589744, "B"),
    ("F", 0.45, "C", 0.676470588, "B", 0.282051282, "C"),
    ("B", 0.425, "C", 0.235294118, "C", 0.230769231, "D"),
    ("F", 0.375, "C", 0.647058824, "B", 0.41025641, "C"),
    ("B", 0.4, "C", 0.147058824, "C", 1, "A"),
    ("F", 0.375, "C", 0.176470588, "C", 0.333333333, "C"),
    ("F", 0.7, "B", 0.294117647, "C", 0.769230769, "A"),
]

# Cells where the published grade disagrees with its own <= thresholds:
# (0-based row, column) -> (literal grade, published grade)
BOUNDARY_EXCEPTIONS = {
    (1, "UG Grade"): ("B", "C"),  # 0.41176 > 0.41
    (7, "UG Grade"): ("A", "B"),  # 0.70588 > 0.70
    (4, "PG Grade"): ("A", "B"),  # 0.74359 > 0.74
    (15, "PG Grade"): ("A", "B"),
    (17, "PG Grade"): ("A", "B"),
    (10, "PG Grade"): ("C", "D"),  # 0.23077 > 0.23
    (19, "PG Grade"): ("C", "D"),
    (13, "PG Grade"): ("B", "C"),  # 0.46154 > 0.46
}

GRADE_COLS = ("Mathematics Grade in XII", "XII Grade", "UG Grade", "PG Grade")


def published_grades():
    return [dict(zip(GRADE_COLS, (m, x, u, p))) for m, _, x, _, u, _, p in PUBLISHED]


def test_min_max_examples():
    assert min_max_normalize([49, 67, 89])[1] == pytest.approx(0.45)
    assert min_max_normalize([55, 73, 89])[1] == pytest.approx(0.529411765)
    vals = min_max_normalize([3, 7, 5])
    assert vals[0] == 0 and vals[1] == 1


def test_min_max_fixed_bounds():
    assert min_max_normalize([67], bounds=(49, 89)) == [pytest.approx(0.45)]


def test_min_max_degenerate():
    with pytest.raises(DegenerateColumn):
        min_max_normalize([5, 5, 5])
    with pytest.raises(DegenerateColumn):
        min_max_normalize([])


@given(hs.lists(hs.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=30))
def test_min_max_monotone(values):
    if max(values) <= min(values):
        return
    out = min_max_normalize(values)
    for a, b, na, nb in zip(values, values[1:], out, out[1:]):
        if a < b:
            assert na <= nb
    assert min(out) == 0 and max(out) == pytest.approx(1)


def test_bin_examples():
    assert bin_normalized(0.153846, PG) == "D"
    assert bin_normalized(0, XII) == "E"
    assert bin_normalized(0, PG) == "E"
    assert bin_normalized(0.75, XII) == "B"
    assert bin_normalized(1, XII) == "A"


def test_bin_out_of_range():
    with pytest.raises(RangeError):
        bin_normalized(1.01, XII)
    with pytest.raises(RangeError):
        bin_normalized(-0.01, XII)


@pytest.mark.parametrize("spec", [XII, UG, PG])
def test_bins_are_closed_on_the_left_label(spec):
    for t in spec.thresholds:
        assert bin_normalized(t, spec) != bin_normalized(t + 1e-9, spec)


@given(hs.floats(0, 1), hs.floats(0, 1))
def test_bin_monotone(a, b):
    a, b = sorted((a, b))
    order = XII.labels
    assert order.index(bin_normalized(a, XII)) <= order.index(bin_normalized(b, XII))


def test_binspec_validation():
    with pytest.raises(SchemaError):
        BinSpec((0.5, 0.2), "ABC")
    with pytest.raises(SchemaError):
        BinSpec((0.2,), "ABC")


@pytest.mark.parametrize("raw,grade", [
    (88, "A"), ("not applicable", "F"), (35, "F"), (37, "F"), (39, "F"), (40, "E"), (79, "B"),
    (80, "A"), (100, "A"), (0, "F"), ("65", "C"), (69.5, "C"),
])
def test_math_grade(raw, grade):
    assert bin_math_grade(raw) == grade


@pytest.mark.parametrize("raw", [101, -1, "n/a"])
def test_math_grade_out_of_range(raw):
    with pytest.raises(RangeError):
        bin_math_grade(raw)


def test_grade_bands_reject_overlap():
    with pytest.raises(SchemaError):
        GradeBands(((0, 50, "B"), (50, 100, "A")))


def test_grade_bands_without_na():
    bands = GradeBands(((0, 49, "B"), (50, 100, "A")))
    with pytest.raises(RangeError):
        bands.label_for("not applicable")


def test_pipeline_literal_thresholds_against_published_table():
    raw = load_csv(RAW_SAMPLE)
    graded, summaries = run_pipeline(raw, default_pipeline())
    published = published_grades()
    mismatches = {}
    for n, row in enumerate(graded.instances):
        for col in GRADE_COLS:
            got = row[graded.schema.index(col)]
            if got != published[n][col]:
                mismatches[(n, col)] = (got, published[n][col])
    assert mismatches == BOUNDARY_EXCEPTIONS
    assert [s.bounds for s in summaries] == [None, (49, 89), (55, 89), (50, 89)]


# The published table prints 0.23529412 for UG 66; (66 - 55) / 34 is 0.3235. Same grade either way.
NORMALIZED_MISPRINTS = {(14, "ug Per"): 0.32352941}


def test_pipeline_normalized_values_match_published():
    raw = load_csv(RAW_SAMPLE)
    for col, (lo, hi), k in (("XII Per", (49, 89), 1), ("ug Per", (55, 89), 3), ("pg Per", (50, 89), 5)):
        got = min_max_normalize(raw.column(col), (lo, hi))
        want = [NORMALIZED_MISPRINTS.get((n, col), row[k]) for n, row in enumerate(PUBLISHED)]
        assert got == pytest.approx(want, abs=1e-8)


def test_percent_band_pipeline_matches_every_cell():
    graded = grade_pipeline(load_csv(RAW_SAMPLE), default_pipeline("pipeline_percent_bands.json"))
    published = published_grades()
    for n, row in enumerate(graded.instances):
        assert {c: row[graded.schema.index(c)] for c in GRADE_COLS} == published[n]


def test_first_published_row():
    graded = grade_pipeline(load_csv(RAW_SAMPLE), default_pipeline())
    first = graded.instances[0]
    got = tuple(first[graded.schema.index(c)] for c in ("XII Grade", "UG Grade", "PG Grade",
                                                         "Mathematics Grade in XII"))
    assert got == ("C", "B", "D", "F")


def test_pipeline_passthrough_and_shape():
    raw = load_csv(RAW_SAMPLE)
    graded = grade_pipeline(raw, default_pipeline())
    assert len(graded) == len(raw)
    for name in ("Category", "UGStream", "ugMedium"):
        assert graded.column(name) == raw.column(name)
    assert graded.schema.names[5] == "Mathematics Grade in XII"
    assert graded.schema["PG Grade"].kind == NOMINAL


def test_empty_config_is_identity():
    raw = load_csv(RAW_SAMPLE)
    same = grade_pipeline(raw, {})
    assert same.schema == raw.schema and same.instances == raw.instances


def test_graded_output_round_trips():
    graded = grade_pipeline(load_csv(RAW_SAMPLE), default_pipeline())
    again = load_csv(io.StringIO(dump_csv(graded)))
    assert again.schema == graded.schema


def test_threshold_rule_on_nominal_column():
    raw = load_csv(RAW_SAMPLE)
    with pytest.raises(AttributeKindError):
        run_pipeline(raw, {"UGStream": ThresholdRule(XII)})


def test_range_error_carries_context():
    raw = load_csv(io.StringIO("p\n50\n95\n"))
    with pytest.raises(RangeError, match="row 2"):
        run_pipeline(raw, {"p": ThresholdRule(XII, bounds=(49, 89))})


def test_config_file(tmp_path):
    path = tmp_path / "p.json"
    path.write_text('{"columns": [{"column": "p", "thresholds": [0.5], "labels": ["lo", "hi"]}]}')
    cfg = load_pipeline_config(path)
    out = grade_pipeline(load_csv(io.StringIO("p\n1\n2\n3\n")), cfg)
    assert out.column("p") == ["lo", "lo", "hi"]


@pytest.mark.parametrize("doc", [{}, {"columns": [{"column": "p"}]},
                                 {"columns": [{"column": "p", "kind": "magic"}]}])
def test_bad_config(doc):
    with pytest.raises(SchemaError):
        parse_pipeline_config(doc)


def test_rank_fixture(mca4):
    ranked = rank_attributes_by_gain(mca4)
    assert [n for n, _ in ranked] == ["UGStream", "XII Grade", "Mathematics Grade in XII", "UG Grade"]
    assert [g for _, g in ranked] == pytest.approx([0.925492, 0.563349, 0.557822, 0.358232], abs=1e-6)


def _toy(rows, names=("a", "b", "c")):
    attrs = [Attribute(n, NOMINAL, tuple(dict.fromkeys(r[i] for r in rows))) for i, n in enumerate(names)]
    return Dataset(Schema(attrs, len(names) - 1), rows)


def test_rank_constant_and_perfect():
    ds = _toy([("x", "p", "A"), ("x", "q", "B"), ("x", "p", "A"), ("x", "q", "B")])
    ranked = rank_attributes_by_gain(ds)
    assert ranked[0] == ("b", pytest.approx(1.0))
    assert ranked[-1] == ("a", 0.0)


def test_rank_ties_keep_schema_order():
    ds = _toy([("x", "x", "A"), ("y", "y", "B")])
    assert [n for n, _ in rank_attributes_by_gain(ds)] == ["a", "b"]


def test_rank_numeric_attribute():
    raw = load_csv(RAW_SAMPLE).with_class("UGStream")
    with pytest.raises(TypeError):
        rank_attributes_by_gain(raw)


def test_select_top_k(mca):
    top = select_top_k(mca, 4)
    assert top.schema.names == ["Mathematics Grade in XII", "XII Grade", "UGStream", "UG Grade", "PG Grade"]


def test_math_bands_labels():
    assert MATH_BANDS.labels == ("A", "B", "C", "D", "E", "F")
    assert math.isclose(len(MATH_BANDS.ranges), 6)
