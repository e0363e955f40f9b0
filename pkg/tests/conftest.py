import numpy as np
import pytest

from helmddm import geometry as geom


@pytest.fixture(scope="session")
def circle_mesh_64():
    return geom.build_graded_mesh(geom.circle(1.0), 64, shift=0.0)


@pytest.fixture(scope="session")
def circle_mesh_128():
    return geom.build_graded_mesh(geom.circle(1.0), 128)


@pytest.fixture(scope="session")
def lshape_mesh_144():
    return geom.build_graded_mesh(geom.l_shape(4.0), 144, 3)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
