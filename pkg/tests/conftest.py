import json
import os

import numpy as np
import pytest

ORACLES_PATH = os.path.join(os.path.dirname(__file__), "oracles", "frozen.json")
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def oracle():
    with open(ORACLES_PATH) as fh:
        return json.load(fh)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance():
    """Collects one line per acceptance criterion for the terminal summary."""
    def record(number, title, passed, detail=""):
        ACCEPTANCE_LINES.append((number, title, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {title}  {detail}")
