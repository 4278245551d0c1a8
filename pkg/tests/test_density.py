import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdc.density import batch_density, brute_force_density, compute_radius


def random_instance(rng, n=None, d=None, clustered=None):
    n = n or int(rng.integers(10, 400))
    d = d or int(rng.integers(1, 11))
    clustered = rng.random() < 0.5 if clustered is None else clustered
    if clustered:
        n_centers = int(rng.integers(1, 6))
        centers = rng.random((n_centers, d)) * 10
        pts = centers[rng.integers(n_centers, size=n)] + rng.normal(0, 0.3, (n, d))
    else:
        pts = rng.random((n, d))
    return pts


def test_radius_uniform_1d():
    assert compute_radius([0.0, 1.0, 2.0, 3.0]) == 5.0


def test_radius_two_plateaus():
    assert compute_radius([0.0, 0.1, 0.2, 10.0, 10.1, 10.2]) == pytest.approx(0.5)


def test_radius_degenerate_points():
    assert compute_radius(np.ones((5, 2))) == 1.0
    profile = batch_density(np.ones((5, 2)))
    assert profile.degenerate
    assert profile.radius == 1.0
    assert profile.densities.tolist() == [5] * 5
    assert profile.region_count == 1


def test_batch_two_plateaus():
    pts = np.array([0.0, 0.1, 0.2, 10.0, 10.1, 10.2])
    profile = batch_density(pts)
    assert profile.densities.tolist() == [3, 3, 3, 3, 3, 3]
    np.testing.assert_array_equal(
        profile.densities, brute_force_density(pts, profile.radius))


def test_batch_all_within_radius():
    profile = batch_density([0.0, 1.0, 2.0, 3.0])
    assert profile.radius == 5.0
    assert profile.densities.tolist() == [4, 4, 4, 4]


def test_brute_force_coincident_pair():
    assert brute_force_density(np.array([[1.0], [1.0]]), 1.0).tolist() == [2, 2]


def test_brute_force_isolated_pair():
    assert brute_force_density(np.array([[0.0], [3.0]]), 1.0).tolist() == [1, 1]


def test_profile_region_count_invariant():
    rng = np.random.default_rng(0)
    for _ in range(20):
        pts = random_instance(rng)
        profile = batch_density(pts)
        theta = pts.min(axis=0)
        r = np.sqrt(((pts - theta) ** 2).sum(axis=1))
        assert profile.region_count == int(np.ceil(r.max() / profile.radius))
        np.testing.assert_array_equal(profile.theta, theta)
        assert (profile.densities >= 1).all()


def test_filter_soundness_dimension_window():
    # every true neighbor pair satisfies the coordinate-sum window
    rng = np.random.default_rng(1)
    for _ in range(10):
        pts = random_instance(rng, d=int(rng.integers(1, 6)))
        profile = batch_density(pts)
        n, d = pts.shape
        dsum = pts.sum(axis=1)
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
        close = d2 <= profile.radius ** 2
        gap = np.abs(dsum[:, None] - dsum[None, :])
        assert (gap[close] <= np.sqrt(d) * profile.radius * (1 + 1e-9)).all()


def test_region_soundness_neighbors_adjacent_rings():
    rng = np.random.default_rng(2)
    for _ in range(10):
        pts = random_instance(rng)
        profile = batch_density(pts)
        theta, radius = profile.theta, profile.radius
        r = np.sqrt(((pts - theta) ** 2).sum(axis=1))
        region = np.ceil(r / radius).astype(int)
        region[region == 0] = 1
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
        neigh = d2 <= radius ** 2
        diff = np.abs(region[:, None] - region[None, :])
        assert (diff[neigh] <= 1).all()


def test_equivalence_random_instances():
    rng = np.random.default_rng(3)
    for _ in range(40):
        pts = random_instance(rng)
        profile = batch_density(pts)
        np.testing.assert_array_equal(
            profile.densities, brute_force_density(pts, profile.radius))


def test_equivalence_duplicate_heavy():
    rng = np.random.default_rng(4)
    base = rng.random((30, 2))
    pts = np.vstack([base, base, base[:10]])
    profile = batch_density(pts)
    np.testing.assert_array_equal(
        profile.densities, brute_force_density(pts, profile.radius))


def test_needs_two_points():
    with pytest.raises(ValueError):
        batch_density(np.array([[1.0, 2.0]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 60), st.integers(1, 4))
def test_equivalence_property(seed, n, d):
    rng = np.random.default_rng(seed)
    pts = random_instance(rng, n=n, d=d)
    profile = batch_density(pts)
    np.testing.assert_array_equal(
        profile.densities, brute_force_density(pts, profile.radius))
