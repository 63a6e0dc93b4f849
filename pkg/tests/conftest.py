import numpy as np
import pytest

from polyquad import shapes
from polyquad.rule import RuleCache


@pytest.fixture(scope="session")
def cache():
    return RuleCache()


@pytest.fixture(scope="session")
def core_shapes():
    return {name: shapes.builtin_shape(name) for name in shapes.CORE_SHAPES}


CUBE_OFF = """OFF
# the cube [-1,1]^3, faces counter-clockwise from outside
8 6 0
-1 -1 -1
1 -1 -1
-1 1 -1
1 1 -1
-1 -1 1
1 -1 1
-1 1 1
1 1 1

4 0 2 3 1
4 4 5 7 6
4 0 1 5 4
4 2 6 7 3
4 0 4 6 2
4 1 3 7 5
"""

TET_OFF = """OFF
4 4 0
0 0 0
1 0 0
0 1 0
0 0 1
3 0 2 1
3 0 1 3
3 0 3 2
3 1 2 3
"""


def monomial_scale(box_lo, box_hi, a, b, c):
    """max |x^a y^b z^c| over an axis-aligned box."""
    out = 1.0
    for k, lo, hi in zip((a, b, c), box_lo, box_hi):
        out *= max(abs(lo), abs(hi)) ** k
    return out


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
