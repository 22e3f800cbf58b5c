import pytest

from fracbody.projbody import QuadConfig
from fracbody.quadrature import BoxQuad, TGrid

ACCEPTANCE_LINES: dict = {}


def record(criterion: int, passed: bool, detail: str, seconds: float, limit: float):
    status = "PASS" if passed else "FAIL"
    line = f"criterion {criterion:2d}: {status}  {detail}  [{seconds:.1f} s / limit {limit:g} s]"
    ACCEPTANCE_LINES[criterion] = line
    print(line)


@pytest.fixture(scope="session")
def quad():
    """Resolution used by the acceptance suite and the CLI defaults."""
    return QuadConfig(sphere_level=8, box=BoxQuad(None, 40), tgrid=TGrid(points=80))


@pytest.fixture(scope="session")
def coarse():
    """Cheap resolution for unit tests."""
    return QuadConfig(sphere_level=4, box=BoxQuad(None, 24), tgrid=TGrid(points=40))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
