import numpy as np
import pytest

from bqreg.model import Dataset


def make_dataset(n=10, columns=None, start="2015-01-01"):
    dates = np.datetime64(start) + np.arange(n)
    return Dataset(dates, columns or {})


def location_problem(n=500, seed=0, noise_sd=0.5):
    """The standard synthetic problem: y = 1 + 2 x1 - x2 + 0.5 e, e ~ N(0,1)."""
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.uniform(0, 2, n), rng.uniform(0, 2, n)])
    y = X @ np.array([1.0, 2.0, -1.0]) + noise_sd * rng.standard_normal(n)
    return X, y


@pytest.fixture
def synthetic():
    return location_problem()


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
