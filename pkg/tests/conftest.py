import itertools

import numpy as np
import pytest

from hullcache.hull import build_hull, sample_sphere


def cube_points() -> np.ndarray:
    return np.array(list(itertools.product([0.0, 1.0], repeat=3)))


def tetra_points() -> np.ndarray:
    return np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])


def octa_points() -> np.ndarray:
    return np.array(
        [[1.0, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    )


def spiked_frustum_points(ring: int = 40) -> np.ndarray:
    """An apex over two stacked rings; the apex has exactly `ring` neighbors.

    The lower ring is not adjacent to the apex, so artificial-edge
    selection has real candidates to choose from.
    """
    angles = 2 * np.pi * np.arange(ring) / ring
    ring_a = np.stack([0.8 * np.cos(angles), 0.8 * np.sin(angles), np.ones(ring)], axis=1)
    ring_b = np.stack([np.cos(angles), np.sin(angles), np.zeros(ring)], axis=1)
    apex = np.array([[0.0, 0.0, 2.0]])
    return np.vstack([apex, ring_a, ring_b])


@pytest.fixture(scope="session")
def cube_hull():
    return build_hull(cube_points())


@pytest.fixture(scope="session")
def tetra_hull():
    return build_hull(tetra_points())


@pytest.fixture(scope="session")
def octa_hull():
    return build_hull(octa_points())


@pytest.fixture(scope="session")
def frustum_hull():
    return build_hull(spiked_frustum_points())


@pytest.fixture(scope="session")
def sphere_hull_512():
    return build_hull(sample_sphere(512, seed=1))


@pytest.fixture(scope="session")
def sphere_hull_2048():
    return build_hull(sample_sphere(2048, seed=3))
