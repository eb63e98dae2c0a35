import pytest

from ptscatter import _backend
from ptscatter.scattering import PAPER_PARAMS

_ACCEPTANCE = {}


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run the test once per importable kernel backend."""
    previous = _backend.use_backend(request.param)
    yield request.param
    _backend.use_backend(previous)


@pytest.fixture
def paper():
    return PAPER_PARAMS


@pytest.fixture
def criterion(request):
    """``criterion(ok, detail)`` prints a PASS/FAIL line for an acceptance test and returns ``ok``."""
    cid = request.node.get_closest_marker("acceptance").args[0]

    def report(ok, detail):
        line = f"[{cid}] {'PASS' if ok else 'FAIL'}: {detail}"
        print(line)
        _ACCEPTANCE[cid] = line
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE, key=lambda c: int(c[1:])):
        terminalreporter.write_line(_ACCEPTANCE[cid])
