import time

import pytest

_RESULTS: list[str] = []


class Criterion:
    """Context manager that records one pass/fail line per acceptance criterion."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.detail = ""

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        status = "PASS" if exc_type is None else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        line = f"[{status}] criterion {self.number:>2}: {self.title}{extra} [{elapsed:.1f}s]"
        _RESULTS.append(line)
        print(line)
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
