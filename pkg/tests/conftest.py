import numpy as np
import pytest

from cegof import GaussianCopulaParams, GumbelCopulaParams, RngStream
from cegof import sample_gaussian_copula, sample_gumbel_copula


def gaussian_data(rho, n, seed, stream=7):
    return sample_gaussian_copula(GaussianCopulaParams.bivariate(rho), n, RngStream(seed, stream))


def gumbel_data(alpha, n, seed, stream=7):
    return sample_gumbel_copula(GumbelCopulaParams(alpha), n, RngStream(seed, stream))


def gaussian_ce(rho):
    return 0.5 * np.log(1.0 - rho ** 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
