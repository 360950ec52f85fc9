import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
PROGRAMS = HERE / "programs"
sys.path.insert(0, str(HERE))

_criteria: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    _criteria[number] = (ok, detail)
    line = f"acceptance criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    sys.__stdout__.write("\n" + line + "\n")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok, detail = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture
def program_text():
    def read(name: str) -> str:
        return (PROGRAMS / name).read_text(encoding="utf-8")
    return read


@pytest.fixture(autouse=True)
def _no_color(monkeypatch):
    monkeypatch.setenv("GEMINI_COLOR", "0")
    yield

