from pathlib import Path

import pytest

from samcheck import parse_spec

GOLDEN = Path(__file__).parent / "golden"


def load_golden(name: str):
    return parse_spec((GOLDEN / "specs" / f"{name}.sam").read_text(encoding="utf-8"))


def golden_names():
    return sorted(p.stem for p in (GOLDEN / "specs").glob("*.sam"))


@pytest.fixture
def doubler():
    return load_golden("doubler")


# (criterion number, passed, one-line detail) filled in by test_acceptance
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
