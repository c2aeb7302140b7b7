from __future__ import annotations

import numpy as np
import pytest

from hankelwave import MeasureParams, calibrate_d_constant, default_grid, make_wavelet, plan
from hankelwave.measure import SampledFunction


@pytest.fixture(scope="session")
def params():
    return MeasureParams(1.0)


@pytest.fixture(scope="session")
def grid(params):
    return default_grid(params)


@pytest.fixture(scope="session")
def hplan(params, grid):
    return plan(params, grid)


@pytest.fixture(scope="session")
def cal(params):
    return calibrate_d_constant(params)


@pytest.fixture(scope="session")
def wavelet(params, hplan):
    return make_wavelet(params, "hankel_mexican:1", plan=hplan)


@pytest.fixture(scope="session")
def gauss(grid):
    return SampledFunction.from_callable(grid, lambda t: np.exp(-0.5 * t * t))


@pytest.fixture(scope="session")
def small_grid(params):
    # cheap grid for tests that rebuild plans
    return default_grid(params, r_max=12.0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE_LINES
    except ImportError:
        return
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
