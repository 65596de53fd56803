import numpy as np
import pytest

from mimobeam import AngleGrid, ArrayGeometry, PatternSpec, Waveform

M_BASE, N_BASE = 10, 32


def baseline_pattern(sidelobe_weight=0.0):
    grid = AngleGrid.uniform(-90.0, 90.0, 1.0)
    desired = np.zeros(len(grid))
    for c in (-40.0, 0.0, 40.0):
        desired[np.abs(grid.angles - c) <= 10.0] = 1.0
    return PatternSpec(grid, desired, [-40.0, 0.0, 40.0], sidelobe_weight)


def random_waveform(rng, M, N, energy=None):
    x = rng.standard_normal(M * N) + 1j * rng.standard_normal(M * N)
    if energy is not None:
        x *= np.sqrt(energy) / np.linalg.norm(x)
    return Waveform(x, M)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def baseline_geometry():
    return ArrayGeometry(M_BASE)


@pytest.fixture(scope="session")
def baseline_spec():
    return baseline_pattern()


# --- acceptance criterion summary ------------------------------------------

_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    key = (mark.args[0], mark.args[1])
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        prev = _criteria.get(key, True)
        _criteria[key] = prev and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), ok in sorted(_criteria.items()):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title}")
