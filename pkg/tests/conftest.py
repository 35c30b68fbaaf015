import numpy as np
import pytest

from gentensor import Chart, profile_catalog, transport_catalog


@pytest.fixture
def chart1():
    return Chart(1, [-2.0], [2.0])


@pytest.fixture
def chart2():
    return Chart(2, [-2.0, -2.0], [2.0, 2.0])


@pytest.fixture
def bump_sym1():
    return profile_catalog("bump_sym", 1)


@pytest.fixture
def bump_shift1():
    return profile_catalog("bump_shift:0.3", 1)


@pytest.fixture
def identity_cut1(chart1):
    return transport_catalog("identity_cut", chart1)


@pytest.fixture
def identity_cut2(chart2):
    return transport_catalog("identity_cut", chart2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
