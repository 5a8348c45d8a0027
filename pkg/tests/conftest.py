import pytest

_RESULTS = []


@pytest.fixture
def report():
    """Record one acceptance line: ``report(number, title, ok, detail)``."""
    def _report(number, title, ok, detail):
        _RESULTS.append((number, title, bool(ok), detail))
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(_RESULTS):
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
