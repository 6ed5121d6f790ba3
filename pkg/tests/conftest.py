from __future__ import annotations

from pathlib import Path

import pytest

import ktforge
from ktforge.frontend.model import parse_project
from ktforge.knowledge import build_index
from ktforge.usage import build_call_graph

TESTS = Path(__file__).resolve().parent
GOLDEN = TESTS / "golden"
DATA = TESTS / "data"
TOY = Path(ktforge.__file__).resolve().parent / "data" / "toy"


@pytest.fixture(scope="session")
def toy_root() -> Path:
    return TOY


@pytest.fixture(scope="session")
def toy_model():
    return parse_project(TOY)


@pytest.fixture(scope="session")
def toy_index(toy_model):
    return build_index(toy_model)


@pytest.fixture(scope="session")
def toy_graph(toy_index):
    return build_call_graph(toy_index)


# ---------------------------------------------------------------------------
# acceptance bookkeeping: one PASS/FAIL line per criterion after the run

_ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


class _Criterion:
    def __init__(self, number: int, title: str, budget_s: float):
        self.number, self.title, self.budget_s = number, title, budget_s

    def __enter__(self):
        import time
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        import time
        elapsed = time.perf_counter() - self._t0
        ok = exc_type is None and elapsed < self.budget_s
        _ACCEPTANCE[self.number] = ("PASS" if ok else "FAIL", self.title, elapsed)
        if exc_type is None and not ok:
            raise AssertionError(f"criterion {self.number} took {elapsed:.2f}s, budget {self.budget_s}s")
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        verdict, title, elapsed = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {verdict}  ({elapsed:.2f}s)  {title}")
