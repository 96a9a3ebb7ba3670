import pytest

_REPORT = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_REPORT] = []


@pytest.fixture(scope="session")
def acceptance_report(request):
    lines = request.config.stash[_REPORT]

    def record(criterion: str, ok: bool, message: str) -> None:
        lines.append(f"{'PASS' if ok else 'FAIL'} {criterion}: {message}")
        assert ok, message

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[_REPORT]
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
