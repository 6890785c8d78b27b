import pytest

_LINES = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """``criterion(k, passed, detail)`` records one acceptance line."""
    lines = request.config.stash.setdefault(_LINES, [])

    def record(k, passed, detail):
        line = f"criterion {k:>2} {'PASS' if passed else 'FAIL'}: {detail}"
        lines.append((k, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
