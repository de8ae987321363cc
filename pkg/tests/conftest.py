import numpy as np
import pytest

from hybridproj.projection import FeasibleRegion, HalfSpace

# lines collected by test_acceptance, echoed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_region(rng, dim=None, max_vertices=15, max_halfspaces=3):
    """Hull of random points cut by half-spaces through a common interior point."""
    d = int(rng.integers(2, 5)) if dim is None else dim
    m = int(rng.integers(d + 1, max_vertices + 1))
    V = rng.uniform(-1, 1, (m, d))
    z0 = rng.dirichlet(np.ones(m)) @ V
    hs = []
    for _ in range(int(rng.integers(0, max_halfspaces + 1))):
        a = rng.normal(size=d)
        hs.append(HalfSpace(a, a @ z0 + rng.uniform(0.0, 0.2)))
    return FeasibleRegion.box(-2.0, 2.0, dim=d, hull_vertices=V, halfspaces=hs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
