import json
import os

import pytest

from edm.cli import main

from conftest import CLASS, COUNTS, FIXTURE, GOLDEN_TREE, RAW_SAMPLE, ROOT

TEST_INSTANCE = os.path.join(ROOT, "docs", "test_instance.csv")
TRAIN = ["--input", FIXTURE, "--class", CLASS, "--select-top", "4"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def model(tmp_path, capsys):
    path = tmp_path / "tree.json"
    assert run(capsys, "train", *TRAIN, "--model", str(path))[0] == 0
    return str(path)


# -- preprocess -------------------------------------------------------------


def test_preprocess_percent_bands(capsys):
    code, out, err = run(capsys, "preprocess", "--input", RAW_SAMPLE, "--pipeline", "percent-bands")
    assert code == 0
    header = out.splitlines()[0].split(",")
    assert "Mathematics Grade in XII" in header and "PG Grade" in header
    assert len(out.splitlines()) == 25
    assert err  # per-column summary goes to stderr


def test_preprocess_default_pipeline_to_file(capsys, tmp_path):
    dest = tmp_path / "out.csv"
    code, out, _ = run(capsys, "preprocess", "--input", RAW_SAMPLE, "--output", str(dest))
    assert code == 0 and out == ""
    assert dest.read_text().count("\n") == 25


def test_preprocess_empty_config_is_identity(capsys, tmp_path):
    cfg = tmp_path / "empty.json"
    cfg.write_text('{"columns": []}')
    src = tmp_path / "in.csv"
    src.write_text("a,b\nx,1\ny,2\n")
    code, out, _ = run(capsys, "preprocess", "--input", str(src), "--pipeline", str(cfg))
    assert code == 0
    assert out == src.read_text()


def test_preprocess_missing_input(capsys):
    code, _, err = run(capsys, "preprocess", "--input", "/nonexistent.csv")
    assert code == 2
    assert "input not found" in err


def test_preprocess_bad_config(capsys, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert run(capsys, "preprocess", "--input", RAW_SAMPLE, "--pipeline", str(cfg))[0] == 3


# -- train / eval / crossval / predict --------------------------------------


def test_train_prints_golden_tree(capsys):
    code, out, _ = run(capsys, "train", *TRAIN)
    assert code == 0
    with open(GOLDEN_TREE, encoding="utf-8") as fh:
        assert out == fh.read()
    assert out.splitlines()[0] == "UGStream = BSC(IT): D"


def test_train_with_explicit_attributes(capsys):
    attrs = "Mathematics Grade in XII,XII Grade,UGStream,UG Grade"
    code, out, _ = run(capsys, "train", "--input", FIXTURE, "--class", CLASS, "--attributes", attrs)
    assert code == 0
    with open(GOLDEN_TREE, encoding="utf-8") as fh:
        assert out == fh.read()


def test_eval_training_set(capsys):
    code, out, _ = run(capsys, "eval", *TRAIN)
    assert code == 0
    assert out.startswith("=== Evaluation on training set ===")
    assert "Total Number of Instances" in out


def test_eval_saved_model_structured(capsys, model):
    code, out, _ = run(capsys, "eval", "--model", model, "--input", FIXTURE, "--format", "structured")
    assert code == 0
    doc = json.loads(out)
    assert doc["summary"]["total"] == 99


def test_crossval_report(capsys):
    code, out, _ = run(capsys, "crossval", *TRAIN, "--folds", "10", "--seed", "2")
    assert code == 0
    assert out.startswith("=== Stratified cross-validation ===")
    line = next(ln for ln in out.splitlines() if ln.startswith("Correctly Classified Instances"))
    assert line.split()[-3:] == ["67", "67.6768", "%"]
    assert "10.101 %" in out
    assert " 18  0  1  4 |  a = D" in out


def test_predict_test_instance(capsys, model):
    code, out, _ = run(capsys, "predict", "--model", model, "--test", TEST_INSTANCE)
    assert code == 0
    assert out.splitlines()[1].split() == ["1", "B", "A", "+"]


def test_predict_structured(capsys, model):
    code, out, _ = run(capsys, "predict", "--model", model, "--test", TEST_INSTANCE, "--format", "structured")
    assert json.loads(out) == [{"index": 1, "actual": "B", "predicted": "A"}]


def test_predict_schema_mismatch(capsys, model, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("Mathematics Grade in XII,UGStream,UG Grade,PG Grade\nB,BSC(Math),B,B\n")
    code, _, err = run(capsys, "predict", "--model", model, "--test", str(bad))
    assert code == 3
    assert "XII Grade" in err


def test_corrupt_model(capsys, tmp_path):
    bad = tmp_path / "model.json"
    bad.write_text('{"format": "edm.id3"')
    assert run(capsys, "predict", "--model", str(bad), "--test", TEST_INSTANCE)[0] == 3


def test_missing_model(capsys):
    code, _, err = run(capsys, "predict", "--model", "/nonexistent.json", "--test", TEST_INSTANCE)
    assert code == 2 and "model not found" in err


def test_unknown_class_column(capsys):
    assert run(capsys, "train", "--input", FIXTURE, "--class", "Nope")[0] == 3


def test_numeric_attribute_is_domain_error(capsys):
    code, _, err = run(capsys, "train", "--input", RAW_SAMPLE, "--class", "UGStream")
    assert code == 1 and err.startswith("edm: error:")


# -- apriori / correlate / crosstab / placement -----------------------------


def test_apriori_counts(capsys):
    code, out, _ = run(capsys, "apriori", "--input", COUNTS, "--min-support-count", "5", "--min-confidence", "0.5")
    assert code == 0
    rows = {ln.split()[0]: ln.split() for ln in out.splitlines() if "->" in ln}
    assert rows["FA->FR"][3] == "0.59"
    assert rows["NE->FA"][3] == "0.875"
    assert len(rows) == 2
    assert "FR,FA" in out and "FA,NE" in out


def test_apriori_relations_and_structured(capsys):
    code, out, _ = run(capsys, "apriori", "--input", COUNTS, "--relations")
    assert code == 0 and "Relations:" in out
    code, out, _ = run(capsys, "apriori", "--input", COUNTS, "--format", "structured")
    assert json.loads(out)["min_support_count"] == 5


def test_apriori_fractional_support(capsys, tmp_path):
    tx = tmp_path / "tx.txt"
    tx.write_text("a,b\na,b\na\nc\n")
    code, out, _ = run(capsys, "apriori", "--input", str(tx), "--min-support", "0.5", "--format", "structured")
    assert code == 0
    doc = json.loads(out)
    assert doc["min_support_count"] == 2
    assert doc["levels"][1]["frequent"] == [{"itemset": ["a", "b"], "count": 2}]


def test_correlate(capsys):
    code, out, _ = run(capsys, "correlate", "--input", FIXTURE, "--x", "UG Grade", "--y", "PG Grade")
    assert code == 0
    assert ".498**" in out and "Encoding: F=0" in out


def test_correlate_map_and_alphabetical(capsys):
    code, out, _ = run(capsys, "correlate", "--input", FIXTURE, "--x", "UGMed", "--y", "PG Grade",
                       "--encoding", "English=1,Hindi=2", "--format", "structured")
    assert code == 0
    assert round(json.loads(out)["r"], 3) == 0.118
    code, out, _ = run(capsys, "correlate", "--input", FIXTURE, "--x", "UGStream", "--y", "PG Grade",
                       "--encoding", "alphabetical")
    assert code == 0


def test_correlate_unknown_label(capsys):
    code, _, err = run(capsys, "correlate", "--input", FIXTURE, "--x", "UGMed", "--y", "PG Grade")
    assert code == 1 and "no encoding" in err


def test_crosstab(capsys):
    code, out, _ = run(capsys, "crosstab", "--input", FIXTURE, "--rows", "UGMed", "--columns", "PG Grade", "--sort")
    assert code == 0
    lines = out.splitlines()
    assert lines[3].split()[1:] == ["A", "B", "C", "D", "Total"]
    assert lines[-2].split() == ["Hindi", "7", "5", "1", "3", "16"]
    assert lines[-1].split() == ["Total", "34", "23", "19", "23", "99"]


def test_placement(capsys):
    code, out, _ = run(capsys, "placement", "70", "65", "62")
    assert code == 0 and out == "First First First → Excellent\n"


def test_placement_errors(capsys):
    assert run(capsys, "placement", "30", "65", "62")[0] == 1
    code, _, err = run(capsys, "placement", "40", "40", "40")
    assert code == 1 and "no rule" in err


def test_placement_structured(capsys):
    code, out, _ = run(capsys, "placement", "60", "61", "45", "--format", "structured")
    assert code == 1  # Second/First/Third has no rule
    code, out, _ = run(capsys, "placement", "60", "61", "61", "--format", "structured")
    assert json.loads(out) == {"bands": ["Second", "First", "First"], "grade": "Good"}


# -- usage, determinism, colour ---------------------------------------------


def test_usage_errors_exit_1(capsys):
    assert run(capsys)[0] == 1
    assert run(capsys, "train")[0] == 1
    assert run(capsys, "bogus")[0] == 1


@pytest.mark.parametrize("argv", [
    ["train", *TRAIN],
    ["crossval", *TRAIN, "--seed", "7"],
    ["apriori", "--input", COUNTS, "--relations"],
])
def test_byte_identical_reruns(tmp_path, capsys, argv):
    outputs = []
    for n in range(2):
        dest = tmp_path / f"run{n}.txt"
        assert main(argv + ["--output", str(dest)]) == 0
        outputs.append(dest.read_bytes())
    assert outputs[0] == outputs[1]


def test_model_file_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["train", *TRAIN, "--model", str(a)])
    main(["train", *TRAIN, "--model", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_colour_only_on_terminals(capsys, monkeypatch):
    from edm import cli

    class Tty:
        def isatty(self):
            return True

    monkeypatch.delenv("EDM_NO_COLOR")
    assert "\033[1m" in cli._color("=== Summary ===\nx", Tty())
    assert "\033[" not in cli._color("=== Summary ===", object())
    monkeypatch.setenv("EDM_NO_COLOR", "1")
    assert "\033[" not in cli._color("=== Summary ===", Tty())
