import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from scatstab.filters import MeyerAnalytic, build_filter_bank  # noqa: E402
from scatstab.signal import Grid, Signal  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# Acceptance results, printed in the terminal summary.
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number:>2}: {name} :: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_grid():
    return Grid.from_period(32.0, 256, origin=-16.0)


@pytest.fixture(scope="session")
def small_bank(small_grid):
    return build_filter_bank(MeyerAnalytic(), 2, small_grid)


@pytest.fixture(scope="session")
def medium_grid():
    return Grid.from_period(64.0, 2048, origin=-32.0)


@pytest.fixture(scope="session")
def medium_bank(medium_grid):
    return build_filter_bank(MeyerAnalytic(), 3, medium_grid)


def random_bandlimited(rng, grid, band, real=True):
    """Random signal with Fourier support in ``0 < |w| <= band``."""
    fcoef = np.zeros(grid.length, dtype=complex)
    mask = (np.abs(grid.omega) <= band) & (grid.omega != 0)
    fcoef[mask] = rng.normal(size=mask.sum()) + 1j * rng.normal(size=mask.sum())
    x = np.fft.ifft(fcoef)
    return Signal(grid, x.real if real else x)
