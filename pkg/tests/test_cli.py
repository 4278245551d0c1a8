import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from sdc.dataset import MissingDataset, load_csv
from sdc.metrics import ari, nmi, purity
from tests.conftest import two_square_blob_dataset


def run_cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "sdc", *args],
                          capture_output=True, text=True, cwd=cwd)


def write_csv(path, ds, labels=False):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for i in range(ds.object_count):
            row = ["" if np.isnan(v) else repr(float(v)) for v in ds.cells[i]]
            if labels:
                row.append(ds.truth_labels[i])
            w.writerow(row)


@pytest.fixture
def blob_csv(tmp_path):
    ds = two_square_blob_dataset(0, n_half=60)
    path = tmp_path / "blobs.csv"
    write_csv(path, ds)
    return path, ds


def read_labels(path):
    out = {}
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        assert header == ["object_id", "cluster_id"]
        for oid, cid in reader:
            out[int(oid)] = int(cid)
    return out


def test_cluster_auto_two_blobs(tmp_path, blob_csv):
    path, ds = blob_csv
    out = tmp_path / "labels.csv"
    res = run_cli("cluster", "--input", str(path), "--output", str(out))
    assert res.returncode == 0, res.stderr
    labels = read_labels(out)
    assert len(labels) == ds.object_count
    assert len(set(labels.values())) == 2


def test_cluster_bogus_mode_exits_1(blob_csv, tmp_path):
    path, _ = blob_csv
    res = run_cli("cluster", "--input", str(path), "--mode", "bogus")
    assert res.returncode == 1


def test_cluster_missing_file_exits_1(tmp_path):
    res = run_cli("cluster", "--input", str(tmp_path / "nope.csv"))
    assert res.returncode == 1


def test_cluster_degenerate_dataset_exits_2(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("1.0,2.0\n")
    res = run_cli("cluster", "--input", str(path),
                  "--output", str(tmp_path / "l.csv"))
    assert res.returncode == 2


def test_cluster_graphs_dir(tmp_path, blob_csv):
    path, ds = blob_csv
    gdir = tmp_path / "graphs"
    res = run_cli("cluster", "--input", str(path),
                  "--output", str(tmp_path / "l.csv"), "--graphs-dir", str(gdir))
    assert res.returncode == 0, res.stderr
    files = sorted(p.name for p in gdir.iterdir())
    assert files == ["graph_dim_1.json", "graph_dim_2.json"]
    records = json.loads((gdir / "graph_dim_1.json").read_text())
    assert set(records[0]) == {"objectId", "value", "density"}
    values = [r["value"] for r in records]
    assert values == sorted(values)


def test_inject_roundtrip_and_repair(tmp_path):
    src = tmp_path / "full.csv"
    ds = MissingDataset(np.arange(40, dtype=float).reshape(20, 2))
    write_csv(src, ds)
    out = tmp_path / "holey.csv"
    res = run_cli("inject", "--input", str(src), "--rate", "0.99",
                  "--seed", "7", "--output", str(out))
    assert res.returncode == 0, res.stderr
    holey = load_csv(out)
    assert not np.isnan(holey.cells).all(axis=1).any()
    assert np.isnan(holey.cells).sum() > 0


def test_inject_rate_zero_identity(tmp_path):
    src = tmp_path / "full.csv"
    ds = MissingDataset(np.arange(12, dtype=float).reshape(6, 2))
    write_csv(src, ds)
    out = tmp_path / "same.csv"
    res = run_cli("inject", "--input", str(src), "--rate", "0", "--seed", "1",
                  "--output", str(out))
    assert res.returncode == 0
    np.testing.assert_array_equal(load_csv(out).cells, ds.cells)


def test_inject_deterministic(tmp_path):
    src = tmp_path / "full.csv"
    write_csv(src, MissingDataset(np.arange(60, dtype=float).reshape(20, 3)))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli("inject", "--input", str(src), "--rate", "0.4", "--seed", "3",
            "--output", str(a))
    run_cli("inject", "--input", str(src), "--rate", "0.4", "--seed", "3",
            "--output", str(b))
    assert a.read_text() == b.read_text()


def test_inject_bad_rate_exits_1(tmp_path):
    src = tmp_path / "full.csv"
    write_csv(src, MissingDataset(np.ones((3, 2))))
    res = run_cli("inject", "--input", str(src), "--rate", "1.5", "--seed", "0",
                  "--output", str(tmp_path / "x.csv"))
    assert res.returncode == 1


def write_label_file(path, mapping):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["object_id", "cluster_id"])
        for k in sorted(mapping):
            w.writerow([k, mapping[k]])


def test_eval_identical_files_all_ones(tmp_path):
    labels = {i: i % 3 for i in range(12)}
    p = tmp_path / "p.csv"
    write_label_file(p, labels)
    res = run_cli("eval", "--pred", str(p), "--truth", str(p))
    assert res.returncode == 0, res.stderr
    scores = json.loads(res.stdout)
    assert scores == {"nmi": 1.0, "ari": 1.0, "purity": 1.0}


def test_eval_disjoint_ids_error(tmp_path):
    p, t = tmp_path / "p.csv", tmp_path / "t.csv"
    write_label_file(p, {0: 0, 1: 1})
    write_label_file(t, {5: 0, 6: 1})
    res = run_cli("eval", "--pred", str(p), "--truth", str(t))
    assert res.returncode == 1


def test_eval_matches_metrics_module(tmp_path):
    pred = {1: 0, 2: 0, 4: 0, 6: 0, 3: 1, 5: 1, 7: 1}
    truth = {1: 0, 2: 0, 3: 1, 4: 1, 5: 1, 6: 1, 7: 1}
    p, t = tmp_path / "p.csv", tmp_path / "t.csv"
    write_label_file(p, pred)
    write_label_file(t, truth)
    res = run_cli("eval", "--pred", str(p), "--truth", str(t))
    scores = json.loads(res.stdout)
    truth_s = {k: str(v) for k, v in truth.items()}
    pred_s = {k: str(v) for k, v in pred.items()}
    assert scores["purity"] == pytest.approx(purity(pred_s, truth_s))
    assert scores["ari"] == pytest.approx(ari(pred_s, truth_s))
    assert scores["nmi"] == pytest.approx(nmi(pred_s, truth_s))
