import pytest

_RESULTS = []


class AcceptanceLog:
    def __init__(self, criterion):
        self.criterion = criterion
        self.checks = []

    def check(self, ok, detail):
        self.checks.append((bool(ok), detail))

    @property
    def passed(self):
        return bool(self.checks) and all(ok for ok, _ in self.checks)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        bad = [d for ok, d in self.checks if not ok]
        if bad:
            detail = "; ".join(bad)
        elif len(self.checks) <= 6:
            detail = "; ".join(d for _, d in self.checks)
        else:
            detail = self.checks[-1][1]
        return f"[{status}] {self.criterion}: {detail}"

    def finish(self):
        print(self.line())
        failures = [d for ok, d in self.checks if not ok]
        assert self.checks, "no checks ran"
        assert not failures, "; ".join(failures)


@pytest.fixture
def acceptance(request):
    """Per-criterion log; call ``.check(ok, detail)`` then ``.finish()``."""
    marker = request.node.get_closest_marker("criterion")
    log = AcceptanceLog(marker.args[0] if marker else request.node.name)
    _RESULTS.append(log)
    return log


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for log in _RESULTS:
        terminalreporter.write_line(log.line())
