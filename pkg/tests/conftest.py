import sys
from pathlib import Path

import pytest

from latspec.catalog import load_catalog
from latspec.spectra import delta_tables

RUNS = Path(__file__).resolve().parents[1] / "src" / "latspec" / "data" / "runs"


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture(scope="session")
def runs_dir():
    return RUNS


@pytest.fixture(scope="session")
def deltas():
    return delta_tables()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
