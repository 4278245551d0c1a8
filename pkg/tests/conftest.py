import pathlib

import numpy as np
import pytest

from sdc.dataset import MissingDataset

DATA_DIR = pathlib.Path(__file__).parent / "data"


@pytest.fixture
def iris_path():
    return DATA_DIR / "iris.csv"


@pytest.fixture
def iris_dataset(iris_path):
    from sdc.dataset import load_csv

    return load_csv(iris_path, label_column="species", has_header=True)


def two_blob_dataset(seed, n_half=320, sep=2.8, sigma=1.0):
    """Two 2-D Gaussian blobs with labels, close enough to overlap."""
    rng = np.random.default_rng(seed)
    a = rng.normal([0.0, 0.0], sigma, (n_half, 2))
    b = rng.normal([sep, sep], sigma, (n_half, 2))
    cells = np.vstack([a, b])
    labels = tuple(["a"] * n_half + ["b"] * n_half)
    return MissingDataset(cells, labels)


def two_square_blob_dataset(seed, n_half=320, sep=4.0, half_width=1.0):
    """Two well-separated uniform square blobs (no tails into the gap)."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(-half_width, half_width, (n_half, 2))
    b = rng.uniform(-half_width, half_width, (n_half, 2)) + sep
    cells = np.vstack([a, b])
    labels = tuple(["a"] * n_half + ["b"] * n_half)
    return MissingDataset(cells, labels)


def blob_grid_dataset(seed, n_points, n_blobs, sigma=0.012):
    """Many tight blobs on a jittered grid, birch-style."""
    rng = np.random.default_rng(seed)
    side = int(np.ceil(np.sqrt(n_blobs)))
    centers = np.array([[(i % side) / side, (i // side) / side]
                        for i in range(n_blobs)]) + 0.5 / side
    which = rng.integers(n_blobs, size=n_points)
    pts = centers[which] + rng.normal(0, sigma, (n_points, 2))
    labels = tuple(str(w) for w in which)
    return MissingDataset(pts, labels)
