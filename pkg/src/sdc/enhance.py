"""Cluster-boundary contraction by gravity on the fully observed objects.

Objects whose density falls strictly below the mean are pulled toward their
five nearest fully observed neighbors and displaced by half the summed force
in a single simultaneous pass; everything else stays bitwise unchanged.
"""
from __future__ import annotations

import warnings

import numpy as np

from .dataset import FullyObservedSet
from .density import DensityProfile
from .spatial import k_nearest_batch, nn_distances

NEIGHBOR_COUNT = 5
# uniform-acceleration motion constants: mass, duration, initial velocity
MASS = 1.0
TIME = 1.0
V0 = 0.0


def low_density_mask(densities) -> np.ndarray:
    """True where density is strictly below the mean density."""
    dens = np.asarray(densities, dtype=np.float64)
    if len(dens) < 1:
        raise ValueError("need at least one density")
    return dens < dens.mean()


def gravity_constant(points) -> float:
    """Force scale: the mean nearest-neighbor distance of the point set."""
    return float(nn_distances(points).mean())


def gravitational_force(x_i, neighbor_points, g: float) -> np.ndarray:
    """Summed force on ``x_i`` from its neighbors, ordered nearest first.

    Term j scales with the distance between the first and the j-th neighbor
    and decays with the squared distance to x_i, so the j=1 term is always
    zero. Zero-distance neighbors are skipped (undefined direction) with a
    warning.
    """
    xi = np.asarray(x_i, dtype=np.float64)
    nbs = np.asarray(neighbor_points, dtype=np.float64)
    force = np.zeros_like(xi)
    if len(nbs) == 0:
        return force
    nb1 = nbs[0]
    for j in range(min(NEIGHBOR_COUNT, len(nbs))):
        diff = nbs[j] - xi
        dist2 = float((diff * diff).sum())
        if dist2 == 0.0:
            warnings.warn("skipping zero-distance neighbor in force sum")
            continue
        scale = g * float(np.sqrt(((nb1 - nbs[j]) ** 2).sum())) / dist2
        force += scale * diff
    return force


def displacement(x_i, neighbor_points, g: float) -> np.ndarray:
    """Movement under the uniform-acceleration model: (t^2 / 2m) F + v0 t."""
    f = gravitational_force(x_i, neighbor_points, g)
    return (TIME * TIME / (2.0 * MASS)) * f + V0 * TIME


def apply_enhancement(fo: FullyObservedSet, profile: DensityProfile) -> FullyObservedSet:
    """Move every low-density fully observed object once, simultaneously.

    Forces are all computed from the original coordinates, so the outcome is
    independent of object order. Returns the input unchanged (with a warning)
    when there is no geometry to work with.
    """
    m = len(fo)
    if m < 2:
        warnings.warn("fewer than 2 fully observed objects: enhancement skipped")
        return fo
    if profile.degenerate:
        warnings.warn("degenerate density (all points coincide): enhancement skipped")
        return fo
    if len(profile.densities) != m:
        raise ValueError("density profile does not match the fully observed set")

    low = low_density_mask(profile.densities)
    if not low.any():
        return fo

    pts = fo.points
    g = gravity_constant(pts)
    low_idx = np.where(low)[0]
    nbr_ids, _ = k_nearest_batch(pts, low_idx, NEIGHBOR_COUNT)

    moved = np.array(pts)
    for row, i in enumerate(low_idx):
        moved[i] = pts[i] + displacement(pts[i], pts[nbr_ids[row]], g)
    return FullyObservedSet(fo.object_ids, moved)
