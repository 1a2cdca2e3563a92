import pytest

_ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(ok, detail)`` then assert ``ok``."""
    tag = request.node.get_closest_marker("criterion").args[0]

    def record(ok: bool, detail: str, status: str | None = None):
        line = f"{tag:<5} {status or ('PASS' if ok else 'FAIL')}  {detail}"
        _ACCEPTANCE[tag] = line
        print(line)
        assert ok, line

    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(tag): acceptance criterion this test decides")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(_ACCEPTANCE, key=lambda t: int(t[2:])):
        terminalreporter.write_line(_ACCEPTANCE[tag])
