import sys

import pytest

from confvote import _backend


@pytest.fixture(params=_backend.available())
def kernels(request):
    """Each available kernel backend in turn."""
    return _backend.load(request.param)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
