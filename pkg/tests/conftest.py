import pytest

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(label, passed, detail)``."""
    results = request.config.stash[_RESULTS]

    def record(label: str, passed: bool, detail: str = "") -> bool:
        results.append((label, bool(passed), detail))
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in sorted(results, key=lambda item: item[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {label}" + (f"  ({detail})" if detail else ""))
