import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdc.metrics import ari, contingency_table, nmi, purity


def pair_classification_ari(pred, truth):
    """Independent ARI from explicit classification of every object pair."""
    objs = sorted(pred)
    together = 0   # same in both
    apart = 0      # different in both
    pred_only = 0  # same in pred, different in truth
    truth_only = 0
    for i, j in itertools.combinations(objs, 2):
        sp = pred[i] == pred[j]
        stv = truth[i] == truth[j]
        if sp and stv:
            together += 1
        elif sp:
            pred_only += 1
        elif stv:
            truth_only += 1
        else:
            apart += 1
    n_pairs = together + apart + pred_only + truth_only
    sum_pred = together + pred_only
    sum_truth = together + truth_only
    expected = sum_pred * sum_truth / n_pairs
    maximum = (sum_pred + sum_truth) / 2
    if maximum == expected:
        return 1.0 if (pred_only == 0 and truth_only == 0) else 0.0
    return (together - expected) / (maximum - expected)


def set_partitions(objects):
    """Enumerate every partition of ``objects`` (restricted growth strings)."""
    if not objects:
        yield []
        return
    first, rest = objects[0], objects[1:]
    for smaller in set_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [smaller[i] + [first]] + smaller[i + 1:]
        yield [[first]] + smaller


def as_labeling(clusters):
    return {o: cid for cid, group in enumerate(clusters) for o in group}


# -------------------------------------------------------------------- purity

def test_purity_perfect():
    pred = {1: "x", 2: "x", 3: "y"}
    truth = {1: 0, 2: 0, 3: 1}
    assert purity(pred, truth) == 1.0


def test_purity_single_cluster_majority():
    pred = {1: 0, 2: 0, 3: 0, 4: 0}
    truth = {1: "a", 2: "a", 3: "b", 4: "b"}
    assert purity(pred, truth) == 0.5


def test_purity_worked_example():
    pred = as_labeling([[1, 2, 3], [4]])
    truth = {1: "a", 2: "a", 3: "b", 4: "b"}
    assert purity(pred, truth) == 0.75


def test_purity_mismatched_ids():
    with pytest.raises(ValueError):
        purity({1: 0}, {2: 0})


def test_purity_non_decreasing_under_refinement():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(4, 30))
        truth = {i: int(rng.integers(3)) for i in range(n)}
        coarse = {i: int(rng.integers(2)) for i in range(n)}
        # refine: split each coarse cluster in two
        fine = {i: (coarse[i], int(rng.integers(2))) for i in range(n)}
        assert purity(fine, truth) >= purity(coarse, truth)


# ----------------------------------------------------------------------- ari

def test_ari_identical():
    pred = as_labeling([[1, 2], [3, 4]])
    assert ari(pred, dict(pred)) == 1.0


def test_ari_opposed_pairing():
    pred = as_labeling([[1, 2], [3, 4]])
    truth = as_labeling([[1, 3], [2, 4]])
    assert ari(pred, truth) == pytest.approx(-0.5)


def test_ari_trivial_partitions():
    # both all-in-one and both all-singletons are identical: 1.0
    assert ari({1: 0, 2: 0}, {1: "z", 2: "z"}) == 1.0
    assert ari({1: 0, 2: 1}, {1: "a", 2: "b"}) == 1.0
    # all-singletons vs all-one is not degenerate: plain formula gives 0
    assert ari({1: 0, 2: 1, 3: 2}, {1: "a", 2: "a", 3: "a"}) == 0.0


def test_ari_needs_two():
    with pytest.raises(ValueError):
        ari({1: 0}, {1: 0})


def test_ari_matches_pair_classification_exhaustively_small():
    objs = list(range(4))
    parts = [as_labeling(p) for p in set_partitions(objs)]
    for pred in parts:
        for truth in parts:
            assert ari(pred, truth) == pytest.approx(
                pair_classification_ari(pred, truth), abs=1e-12)


def test_ari_matches_pair_classification_random_n8():
    rng = np.random.default_rng(1)
    for _ in range(300):
        n = int(rng.integers(2, 9))
        pred = {i: int(rng.integers(1, 4)) for i in range(n)}
        truth = {i: int(rng.integers(1, 4)) for i in range(n)}
        assert ari(pred, truth) == pytest.approx(
            pair_classification_ari(pred, truth), abs=1e-12)


# ----------------------------------------------------------------------- nmi

def test_nmi_identical_nontrivial():
    pred = as_labeling([[1, 2], [3, 4]])
    assert nmi(pred, dict(pred)) == pytest.approx(1.0)


def test_nmi_truth_single_cluster_is_zero():
    pred = as_labeling([[1, 2], [3, 4]])
    truth = {1: "s", 2: "s", 3: "s", 4: "s"}
    assert nmi(pred, truth) == 0.0


def test_nmi_both_trivial_is_one():
    assert nmi({1: 0, 2: 0}, {1: "a", 2: "a"}) == 1.0


def test_nmi_independent_partitions():
    pred = as_labeling([[1, 2], [3, 4]])
    truth = as_labeling([[1, 3], [2, 4]])
    assert nmi(pred, truth) == pytest.approx(0.0, abs=1e-12)


def hand_nmi(table):
    """Direct arithmetic-mean NMI from a contingency matrix."""
    table = np.asarray(table, dtype=float)
    n = table.sum()
    hp = -sum(r / n * math.log(r / n) for r in table.sum(1) if r)
    ht = -sum(c / n * math.log(c / n) for c in table.sum(0) if c)
    if hp == 0 and ht == 0:
        return 1.0
    if hp == 0 or ht == 0:
        return 0.0
    info = 0.0
    for k in range(table.shape[0]):
        for l in range(table.shape[1]):
            if table[k, l]:
                info += table[k, l] / n * math.log(
                    table[k, l] * n / (table.sum(1)[k] * table.sum(0)[l]))
    return info / ((hp + ht) / 2)


FIXTURE_TABLES = [
    [[2, 0], [0, 2]],
    [[3, 1], [0, 4]],
    [[5, 0, 0], [0, 5, 0], [0, 0, 5]],
    [[2, 2], [2, 2]],
    [[1, 0], [0, 1], [1, 1]],
    [[4], [3]],
    [[7, 2, 1], [0, 5, 5]],
    [[1, 1, 1, 1]],
    [[10, 0], [1, 9]],
    [[2, 1], [1, 2], [3, 3]],
    [[6, 0, 0], [0, 3, 3]],
]


def labelings_from_table(table):
    pred, truth = {}, {}
    oid = 0
    for k, row in enumerate(table):
        for l, count in enumerate(row):
            for _ in range(count):
                pred[oid] = k
                truth[oid] = l
                oid += 1
    return pred, truth


@pytest.mark.parametrize("table", FIXTURE_TABLES)
def test_nmi_and_purity_match_hand_contingency(table):
    pred, truth = labelings_from_table(table)
    tbl = np.asarray(table)
    expected_purity = tbl.max(axis=1).sum() / tbl.sum()
    assert contingency_table(pred, truth).sum() == tbl.sum()
    assert purity(pred, truth) == pytest.approx(expected_purity, abs=1e-12)
    assert nmi(pred, truth) == pytest.approx(hand_nmi(table), abs=1e-12)


# ----------------------------------------------------------------- invariance

@settings(max_examples=60, deadline=None)
@given(st.integers(2, 24), st.integers(0, 10_000))
def test_relabeling_invariance(n, seed):
    rng = np.random.default_rng(seed)
    pred = {i: int(rng.integers(1, 5)) for i in range(n)}
    truth = {i: int(rng.integers(1, 5)) for i in range(n)}
    names = {1: "w", 2: "x", 3: "y", 4: "z"}
    pred2 = {i: names[c] for i, c in pred.items()}
    truth2 = {i: -c for i, c in truth.items()}
    assert purity(pred, truth) == pytest.approx(purity(pred2, truth2))
    assert ari(pred, truth) == pytest.approx(ari(pred2, truth2))
    assert nmi(pred, truth) == pytest.approx(nmi(pred2, truth2))
