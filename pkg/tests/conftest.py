import json
import os
from pathlib import Path

import pytest
from hypothesis import settings

# "default" is reproducible; HYPOTHESIS_PROFILE=explore searches wider
settings.register_profile("default", max_examples=40, derandomize=True)
settings.register_profile("explore", max_examples=800)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ORACLE_PATH = Path(__file__).parent / "data" / "oracle_values.json"
ORACLE = json.loads(ORACLE_PATH.read_text())

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def oracle_value(key):
    return ORACLE[key]["value"]


@pytest.fixture(scope="session")
def oracle():
    return ORACLE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
