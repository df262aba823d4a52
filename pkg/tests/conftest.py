import math

import numpy as np
import pytest

from spectral_billiards.geometry import (elliptic_table,
                                         elliptic_table_for_ellipse,
                                         make_circle, make_ellipse)


@pytest.fixture(scope="session")
def unit_circle():
    return make_circle(1.0)


@pytest.fixture(scope="session")
def ellipse21():
    return make_ellipse(2.0, 1.0)


@pytest.fixture(scope="session")
def table_c1():
    """Elliptic-coordinate table f = sin^2 x, q = -sinh^2 y, N = 1."""
    return elliptic_table(1.0, 1.0)


@pytest.fixture(scope="session")
def table_e21():
    """Liouville data of the a=2, b=1 ellipse."""
    return elliptic_table_for_ellipse(2.0, 1.0)


@pytest.fixture(scope="session")
def golden():
    return (math.sqrt(5.0) - 1.0) / 2.0


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
