import numpy as np
import pytest

from hyperunitary import catalog
from hyperunitary.unitary import UnitarySpace


@pytest.fixture(scope="session")
def space():
    """``space(name, n=3)``: a cached hyperbolic space over a catalog form ring."""
    cache = {}

    def get(name, n=3):
        if (name, n) not in cache:
            cache[name, n] = UnitarySpace(catalog.form_ring(name), n)
        return cache[name, n]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
