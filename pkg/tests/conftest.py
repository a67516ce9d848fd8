import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CORPUS = Path(__file__).parent / "corpus"

# (criterion, passed, detail) rows printed at the end of the run
ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
