import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from marriage_hact import default_params, solve_ct, solve_dt  # noqa: E402
from marriage_hact.experiments import prices_at  # noqa: E402
from marriage_hact.params import TrendPath  # noqa: E402

DEFAULT_SEED = 20260223


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=DEFAULT_SEED, help="seed for the Monte Carlo oracles")


@pytest.fixture(scope="session")
def seed(request):
    return request.config.getoption("--seed")


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def prices_1950():
    return prices_at(TrendPath(), 1950)


@pytest.fixture(scope="session")
def prices_2000():
    return prices_at(TrendPath(), 2000)


@pytest.fixture(scope="session")
def ct_1950(params, prices_1950):
    w, p = prices_1950
    return solve_ct(params, p, w)


@pytest.fixture(scope="session")
def dt_1950(params, prices_1950):
    w, p = prices_1950
    return solve_dt(params, p, w)
