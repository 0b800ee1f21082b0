import numpy as np
import pytest
from loguru import logger

import extremepy
from extremepy.core.conf import ExtremePyConf, NumericsConf, OptimizerConf
from extremepy.core.sites import SiteSet


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow", action="store_true", default=False, help="运行耗时的参数恢复实验"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="需要 --run-slow 选项")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session", autouse=True)
def init_extremepy_config():
    previous = extremepy.config
    logger.info("Initializing extremepy config with reduced QMC sizes")
    extremepy.config = ExtremePyConf(
        numerics=NumericsConf(
            qmc_points=2_000,
            likelihood_qmc_points=500,
            hw_chi_draws=100_000,
        ),  # type: ignore
        optimizer=OptimizerConf(restarts=1),  # type: ignore
    )
    yield extremepy.config
    extremepy.config = previous


@pytest.fixture
def rng():
    return np.random.default_rng(20230917)


@pytest.fixture
def pair_sites():
    return SiteSet(np.array([[0.0, 0.0], [1.0, 0.0]]))


@pytest.fixture
def line_sites():
    return SiteSet(np.column_stack([np.arange(5, dtype=float), np.zeros(5)]))


@pytest.fixture
def grid_sites():
    xs, ys = np.meshgrid(np.arange(3, dtype=float), np.arange(3, dtype=float))
    return SiteSet(np.column_stack([xs.ravel(), ys.ravel()]))
