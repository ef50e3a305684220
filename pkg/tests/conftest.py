import os

import pytest

from edm.dataset import load_csv

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(HERE)
DATA = os.path.join(ROOT, "src", "edm", "data")
FIXTURE = os.path.join(DATA, "mca_fixture.csv")
RAW_SAMPLE = os.path.join(DATA, "mca_raw_sample.csv")
COUNTS = os.path.join(DATA, "advertisement_counts.csv")
GOLDEN_TREE = os.path.join(HERE, "golden", "id3_tree.txt")

SELECTED = ["Mathematics Grade in XII", "XII Grade", "UGStream", "UG Grade"]
CLASS = "PG Grade"


@pytest.fixture(scope="session")
def mca():
    return load_csv(FIXTURE, class_column=CLASS)


@pytest.fixture(scope="session")
def mca4(mca):
    return mca.project(SELECTED)


@pytest.fixture(autouse=True)
def _no_color(monkeypatch):
    monkeypatch.setenv("EDM_NO_COLOR", "1")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
