"""External clustering quality: purity, adjusted Rand index, NMI.

All three are computed from the contingency table between a predicted
partition and ground-truth labels over the same object set. Labels may be any
hashable values; only co-membership matters.
"""
from __future__ import annotations

from typing import Mapping, Union

import numpy as np

from .partition import ClusterPartition

Labeling = Union[ClusterPartition, Mapping[int, object]]


def _as_mapping(labeling: Labeling) -> Mapping[int, object]:
    if isinstance(labeling, ClusterPartition):
        return labeling.assignments
    return labeling


def contingency_table(pred: Labeling, truth: Labeling) -> np.ndarray:
    """Counts n_kl of objects in predicted cluster k and truth class l."""
    p = _as_mapping(pred)
    t = _as_mapping(truth)
    if set(p) != set(t):
        raise ValueError("prediction and truth must cover the same object ids")
    if not p:
        raise ValueError("empty labelings")
    rows = {c: i for i, c in enumerate(sorted(set(p.values()), key=repr))}
    cols = {c: i for i, c in enumerate(sorted(set(t.values()), key=repr))}
    table = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for oid, pc in p.items():
        table[rows[pc], cols[t[oid]]] += 1
    return table


def purity(pred: Labeling, truth: Labeling) -> float:
    """Fraction of objects in their cluster's majority class."""
    table = contingency_table(pred, truth)
    return float(table.max(axis=1).sum() / table.sum())


def _choose2(x: np.ndarray) -> np.ndarray:
    return x * (x - 1) / 2.0


def ari(pred: Labeling, truth: Labeling) -> float:
    """Adjusted Rand index in [-1, 1].

    When the expected index equals the maximum (both partitions trivial), the
    convention is 1.0 for identical partitions and 0.0 otherwise.
    """
    table = contingency_table(pred, truth)
    n = int(table.sum())
    if n < 2:
        raise ValueError("ari needs at least 2 objects")
    index = _choose2(table.astype(np.float64)).sum()
    row_pairs = _choose2(table.sum(axis=1).astype(np.float64)).sum()
    col_pairs = _choose2(table.sum(axis=0).astype(np.float64)).sum()
    expected = row_pairs * col_pairs / _choose2(np.float64(n))
    maximum = (row_pairs + col_pairs) / 2.0
    if maximum == expected:
        # reachable only when both partitions are all-singletons or all-in-one
        nz = table > 0
        identical = (nz.sum(axis=1) == 1).all() and (nz.sum(axis=0) == 1).all()
        return 1.0 if identical else 0.0
    return float((index - expected) / (maximum - expected))


def nmi(pred: Labeling, truth: Labeling) -> float:
    """Mutual information normalized by the mean of the two entropies.

    Natural-log entropies. Both entropies zero -> 1.0; exactly one zero -> 0.0.
    """
    table = contingency_table(pred, truth).astype(np.float64)
    n = table.sum()
    pk = table.sum(axis=1) / n
    pl = table.sum(axis=0) / n
    h_pred = float(-(pk[pk > 0] * np.log(pk[pk > 0])).sum())
    h_truth = float(-(pl[pl > 0] * np.log(pl[pl > 0])).sum())
    if h_pred == 0.0 and h_truth == 0.0:
        return 1.0
    if h_pred == 0.0 or h_truth == 0.0:
        return 0.0
    joint = table / n
    outer = np.outer(pk, pl)
    mask = joint > 0
    info = float((joint[mask] * np.log(joint[mask] / outer[mask])).sum())
    return info / ((h_pred + h_truth) / 2.0)
