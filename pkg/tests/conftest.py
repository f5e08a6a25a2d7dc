import math

import numpy as np
import pytest

from regbary.rng import SplitMix64
from regbary.space import Measure, build_circle, build_graph, build_sphere_grid, sphere_ring


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def smrng():
    return SplitMix64(20261015)


@pytest.fixture(scope="session")
def sphere():
    return build_sphere_grid(5, 8)


@pytest.fixture(scope="session")
def equator(sphere):
    return sphere_ring(5, 8, 3)


@pytest.fixture(scope="session")
def poles_measure(sphere):
    return Measure.from_atoms(sphere.n, {0: 0.5, sphere.n - 1: 0.5})


@pytest.fixture(scope="session")
def circle16():
    return build_circle(16)


@pytest.fixture(scope="session")
def near_tie():
    """A line -1, -h, +h, +1 with a leaf hanging one unit off -h.

    Under mu the points -h and +h have costs within tol_b of each other but
    +h is the strict minimizer.  Without snapping, the atom at -h collapses
    onto +h long before the leaf atom reaches the barycenter set, so the
    epsilon path never visits B(mu).
    """
    h, shift = 1e-7, 2.5e-4
    edges = [(0, 1, 1 - h), (1, 2, 2 * h), (2, 3, 1 - h), (1, 4, 1.0)]
    space = build_graph(edges, 5)
    p = (1 - shift) / 2
    return space, Measure([p, 0.0, 0.0, 1 - p, 0.0])


# one summary line per acceptance criterion
_criteria = {}


def pytest_runtest_logreport(report):
    if "acceptance" in report.keywords and report.when == "call":
        _criteria[report.nodeid] = report.outcome
    elif "acceptance" in report.keywords and report.when == "setup" and report.failed:
        _criteria[report.nodeid] = "error"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _criteria.items():
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
