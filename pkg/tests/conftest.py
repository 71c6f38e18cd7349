import pytest

from pbl import kernels

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion.

    Usage: ``with criterion(3, "eigenvalue lattice") as rec: ...; rec.detail = "..."``.
    The line is written whether the body passes or raises.
    """
    lines = request.config.stash[_LINES_KEY]

    class _Record:
        def __init__(self, number, title):
            self.number, self.title, self.detail = number, title, ""

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            status = "PASS" if exc_type is None else "FAIL"
            detail = self.detail or (str(exc).splitlines()[0] if exc else "")
            lines.append(f"criterion {self.number:>2} {status}  {self.title}: {detail}")
            print(lines[-1])
            return False

    return _Record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash[_LINES_KEY]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    return kernels.available_backends()[request.param]
