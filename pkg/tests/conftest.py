import sys

import numpy as np
import pytest

from hadamard_sm.geometry import SpaceFormParams
from hadamard_sm.grid import build_grid



@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=20240611))


@pytest.fixture(params=[(3, 0.0), (5, -1.0)], ids=["R3", "H5"])
def space(request):
    n, c = request.param
    return SpaceFormParams(n, c)


@pytest.fixture
def grid(space):
    return build_grid(space, None, 1000)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion that ran."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])
