"""Shared fixtures: precision contexts and Szego evaluators reused across modules."""

import pytest

from opuclab.numerics import PrecisionContext
from opuclab.potentials import PRESETS, Cosine
from opuclab.szego import szego_apparatus


@pytest.fixture(scope="session")
def ctx256():
    return PrecisionContext(256)


@pytest.fixture(scope="session")
def ctx128():
    return PrecisionContext(128)


@pytest.fixture(scope="session")
def jump3():
    return PRESETS["jump3"]()


@pytest.fixture(scope="session")
def thumbnail():
    return PRESETS["thumbnail"]()


@pytest.fixture(scope="session")
def sz_jump3(jump3, ctx256):
    return szego_apparatus(jump3, ctx256)


@pytest.fixture(scope="session")
def sz_thumbnail(thumbnail, ctx256):
    return szego_apparatus(thumbnail, ctx256)


@pytest.fixture(scope="session")
def sz_cos05(ctx256):
    return szego_apparatus(Cosine(0.5), ctx256)


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance verdicts, one line per criterion."""
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
