import pytest

_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """``criterion(k, ok, detail)`` records and prints one verdict line."""
    def record(k: int, ok: bool, detail: str) -> bool:
        ok = bool(ok)
        _RESULTS[k] = (ok, detail)
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_RESULTS):
        ok, detail = _RESULTS[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}")
