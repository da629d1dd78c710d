import time

import pytest

from smcsim.config import load_scenario, preset_path
from smcsim.sim import run_scenario


def _timed_run(name):
    scenario = load_scenario(preset_path(name))
    t0 = time.perf_counter()
    log = run_scenario(scenario)
    elapsed = time.perf_counter() - t0
    return scenario, log, elapsed


@pytest.fixture(scope="session")
def smooth_run():
    return _timed_run("regulation-smooth")


@pytest.fixture(scope="session")
def square_run():
    return _timed_run("regulation-square")


@pytest.fixture(scope="session")
def tracking_run():
    return _timed_run("tracking")


@pytest.fixture(scope="session")
def compare_runs():
    return {
        name: _timed_run(f"compare-smooth-{name}")
        for name in ("adaptive", "plestan-fast", "plestan-slow")
    }
