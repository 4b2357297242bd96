from fractions import Fraction

import pytest

from genfeyn.cli import bundled_measure_config
from genfeyn.engine import VolumeSpec
from genfeyn.moments import DiscreteMeasure, measure_from_config

ACCEPTANCE_LINES = []


def bell_triangle(n):
    """Bell number from the Bell triangle (independent of any enumeration)."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def double_factorial(k):
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


@pytest.fixture
def two_site():
    return measure_from_config(bundled_measure_config())


@pytest.fixture
def pm_one():
    """One site, phi = +1 or -1 with equal weight."""
    return DiscreteMeasure([(Fraction(1, 2), (1,)), (Fraction(1, 2), (-1,))])


@pytest.fixture
def skewed():
    """Three sites with nonzero odd cumulants."""
    return DiscreteMeasure([
        (Fraction(1, 3), (1, 0, 2)),
        (Fraction(1, 6), (-2, 1, 0)),
        (Fraction(1, 2), (0, -1, 1)),
    ])


@pytest.fixture
def unit_volume():
    return VolumeSpec.uniform([0, 1])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
