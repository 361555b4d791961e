import numpy as np
import pytest

from walklab import make_heaviside, make_periodic, make_scenery, make_step_law


@pytest.fixture(scope="session")
def lazy1():
    return make_step_law("lazy_srw_d", {"d": 1, "hold": 0.5})


@pytest.fixture(scope="session")
def lazy2():
    return make_step_law("lazy_srw_d", {"d": 2, "hold": 0.5})


@pytest.fixture(scope="session")
def drift_law():
    return make_step_law("drift_pareto", {"v": 0.5, "beta": 3.0, "k_max": 10**4})


@pytest.fixture(scope="session")
def plus_one_law():
    return make_step_law("table", {"sites": [[1]], "probs": [1.0]})


@pytest.fixture(scope="session")
def parity():
    return make_periodic(1, [2], [1.0, -1.0])


@pytest.fixture(scope="session")
def heaviside():
    return make_heaviside()


@pytest.fixture(scope="session")
def scenery1():
    return make_scenery(1, 12345)


def assert_close(a, b, tol, msg=""):
    assert abs(a - b) <= tol, f"{msg}: |{a} - {b}| = {abs(a - b)} > {tol}"


def pytest_configure(config):
    np.seterr(all="raise", under="ignore")
