import os
import sys

import numpy as np
import pytest

# Add the project root and the tests directory to Python path
ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.append(ROOT)
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from synthetic import (  # noqa: E402
    coordinate_filters,
    dataset,
    lattice_loop,
    rectangle_loop,
    two_clusters,
)

BUNDLED_LOOP = os.path.join(ROOT, "data", "synthetic_loop_200.csv")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def loop_points():
    return rectangle_loop(200, np.random.default_rng(7))


@pytest.fixture
def loop_data(loop_points):
    return dataset(loop_points)


@pytest.fixture
def loop_filters(loop_points):
    return coordinate_filters(loop_points)


@pytest.fixture
def lattice_points():
    return lattice_loop()


@pytest.fixture
def cluster_points():
    return two_clusters(30, np.random.default_rng(3))


@pytest.fixture
def bundled_loop_path():
    return BUNDLED_LOOP
