"""Decision graphs, mountain thresholds, single-dimension partitions and fusion.

The pipeline clusters each observed dimension independently from its decision
graph, then folds the per-dimension partitions together by partition
intersection, absorbing objects that are missing on one side into the
best-matching fusion cluster.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .dataset import (
    DimensionView,
    FullyObservedSet,
    MissingDataset,
    fully_observed,
    normalize_min_max,
    split_dimension,
)
from .density import batch_density
from .enhance import apply_enhancement

# auto mountain detection: constants frozen against the acceptance battery
KDE_BINS = 2048
BANDWIDTH_FACTOR = 0.28       # x Silverman's rule
PEAK_KEEP = 0.15              # keep peaks with persistence >= this x max profile
SECOND_PEAK_GATE = 0.45       # dim is cuttable only if 2nd peak reaches this
VALLEY_CEILING = 0.45         # a cut must pass through profile <= this x max


@dataclass(frozen=True)
class DecisionGraph:
    """Sorted (object id, value, density) triplets for one dimension."""

    dim_index: int
    object_ids: np.ndarray
    values: np.ndarray
    densities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "object_ids", np.asarray(self.object_ids, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "densities", np.asarray(self.densities, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.object_ids)

    def to_records(self) -> list[dict]:
        """The export schema shared with the HTTP service and the UI."""
        return [
            {"objectId": int(o), "value": float(v), "density": int(r)}
            for o, v, r in zip(self.object_ids, self.values, self.densities)
        ]


@dataclass(frozen=True)
class Thresholds:
    """Strictly increasing cut values inside one dimension's value range."""

    dim_index: int
    boundaries: tuple[float, ...] = ()

    def __post_init__(self):
        bs = tuple(float(b) for b in self.boundaries)
        if any(b2 <= b1 for b1, b2 in zip(bs, bs[1:])):
            raise ValueError("boundaries must be strictly increasing")
        object.__setattr__(self, "boundaries", bs)


@dataclass(frozen=True)
class ClusterPartition:
    """A disjoint assignment of object ids to dense cluster ids 0..S-1."""

    assignments: dict[int, int]

    def __post_init__(self):
        if self.assignments:
            cids = sorted(set(self.assignments.values()))
            if cids[0] != 0 or cids[-1] != len(cids) - 1:
                raise ValueError("cluster ids must be dense 0..S-1")

    @property
    def cluster_count(self) -> int:
        return len(set(self.assignments.values()))

    def clusters(self) -> list[list[int]]:
        """Members per cluster id, each list sorted by object id."""
        out: list[list[int]] = [[] for _ in range(self.cluster_count)]
        for oid in sorted(self.assignments):
            out[self.assignments[oid]].append(oid)
        return out

    def sizes(self) -> list[int]:
        counts = [0] * self.cluster_count
        for cid in self.assignments.values():
            counts[cid] += 1
        return counts

    def __len__(self) -> int:
        return len(self.assignments)


ThresholdProvider = Callable[[DecisionGraph], Thresholds]


def build_decision_graph(view: DimensionView) -> DecisionGraph:
    """Attach batch densities to a sorted dimension view."""
    if len(view) < 2:
        raise ValueError("decision graph needs at least 2 entries")
    profile = batch_density(view.values[:, None])
    return DecisionGraph(view.dim_index, view.object_ids, view.values, profile.densities)


def _peak_persistence(profile: np.ndarray) -> list[tuple[int, float]]:
    """(index, persistence) of every local maximum, via merge-tree sweep.

    Surviving components persist down to the global minimum. Ties in height
    are processed leftmost first, and the higher-index peak dies on merges,
    keeping the result deterministic.
    """
    n = len(profile)
    order = np.argsort(-profile, kind="stable")
    parent = np.full(n, -1, dtype=np.int64)
    birth_height: dict[int, float] = {}
    birth_index: dict[int, int] = {}
    persistence: dict[int, float] = {}
    active = np.zeros(n, dtype=bool)

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for raw in order:
        idx = int(raw)
        parent[idx] = idx
        birth_height[idx] = float(profile[idx])
        birth_index[idx] = idx
        active[idx] = True
        for nb in (idx - 1, idx + 1):
            if 0 <= nb < n and active[nb]:
                ra, rb = find(idx), find(nb)
                if ra == rb:
                    continue
                ka = (birth_height[ra], -birth_index[ra])
                kb = (birth_height[rb], -birth_index[rb])
                dead, live = (ra, rb) if ka < kb else (rb, ra)
                persistence[birth_index[dead]] = birth_height[dead] - float(profile[idx])
                parent[dead] = live
    low = float(profile.min())
    for root in {find(i) for i in range(n)}:
        persistence[birth_index[root]] = birth_height[root] - low
    return sorted(persistence.items())


def detect_mountains_auto(graph: DecisionGraph) -> Thresholds:
    """Deterministic stand-in for reading mountains off the graph by eye.

    A binned Gaussian-KDE profile of the values is scanned for persistent
    peaks; a dimension is cut only when it shows convincing multi-mountain
    structure (strong second peak) and each cut must pass through a genuinely
    low valley. Boundaries land midway between the two samples flanking the
    valley. All-equal densities are never cut.
    """
    values = graph.values
    n = len(values)
    if n < 2 or np.all(graph.densities == graph.densities[0]):
        return Thresholds(graph.dim_index)
    if values[0] == values[-1]:
        return Thresholds(graph.dim_index)

    std = float(values.std())
    q75, q25 = np.percentile(values, [75, 25])
    scales = [s for s in (std, (q75 - q25) / 1.34) if s > 0]
    if not scales:
        return Thresholds(graph.dim_index)
    bandwidth = BANDWIDTH_FACTOR * 0.9 * min(scales) * n ** (-0.2)

    pad = 3.0 * bandwidth
    edges = np.linspace(values[0] - pad, values[-1] + pad, KDE_BINS + 1)
    hist, _ = np.histogram(values, bins=edges)
    bin_width = edges[1] - edges[0]
    profile = gaussian_filter1d(hist.astype(np.float64), sigma=bandwidth / bin_width,
                                mode="constant")
    centers = (edges[:-1] + edges[1:]) / 2.0
    top = float(profile.max())
    if top <= 0:
        return Thresholds(graph.dim_index)

    peaks = _peak_persistence(profile)
    ranked = sorted((p for _, p in peaks), reverse=True)
    if len(ranked) < 2 or ranked[1] < SECOND_PEAK_GATE * top:
        return Thresholds(graph.dim_index)

    kept = sorted(i for i, p in peaks if p >= PEAK_KEEP * top)
    boundaries: list[float] = []
    for a, b in zip(kept, kept[1:]):
        segment = profile[a + 1:b]
        if len(segment) == 0:
            continue
        off = int(np.argmin(segment))
        if segment[off] > VALLEY_CEILING * top:
            continue  # the dip stays high up the mountain: same cluster
        valley_pos = centers[a + 1 + off]
        left = values[values <= valley_pos]
        right = values[values > valley_pos]
        if len(left) == 0 or len(right) == 0:
            continue
        cut = (float(left.max()) + float(right.min())) / 2.0
        if values[0] < cut < values[-1] and (not boundaries or cut > boundaries[-1]):
            boundaries.append(cut)
    return Thresholds(graph.dim_index, tuple(boundaries))


def partition_by_thresholds(view: DimensionView, thresholds: Thresholds) -> ClusterPartition:
    """Bucket the view's objects into the intervals the boundaries define.

    A value equal to a boundary falls into the right interval. Empty
    intervals are dropped and ids re-densified left to right.
    """
    bounds = np.asarray(thresholds.boundaries, dtype=np.float64)
    buckets = np.searchsorted(bounds, view.values, side="right")
    used = np.unique(buckets)
    remap = {int(b): i for i, b in enumerate(used)}
    return ClusterPartition(
        {int(o): remap[int(b)] for o, b in zip(view.object_ids, buckets)}
    )


def partition_intersection(a: ClusterPartition, b: ClusterPartition) -> ClusterPartition:
    """Nonempty pairwise intersections over the objects present in both.

    Fusion cluster ids follow the lexicographic order of the (a-cluster,
    b-cluster) id pairs.
    """
    pairs: dict[tuple[int, int], list[int]] = {}
    bmap = b.assignments
    for oid, ca in a.assignments.items():
        cb = bmap.get(oid)
        if cb is not None:
            pairs.setdefault((ca, cb), []).append(oid)
    out: dict[int, int] = {}
    for cid, key in enumerate(sorted(pairs)):
        for oid in pairs[key]:
            out[oid] = cid
    return ClusterPartition(out)


def merge_missing_objects(
    fused: ClusterPartition, a: ClusterPartition, b: ClusterPartition
) -> ClusterPartition:
    """Assign objects present in exactly one of a, b to a fusion cluster.

    Each one-sided object is anchored by its cluster C on the side where it
    is observed: it joins the fusion cluster holding the most members of C
    (ties to the lower id). If no member of C was fused, C's absent members
    become one new fusion cluster. Objects in neither partition stay out.
    """
    out = dict(fused.assignments)
    next_id = fused.cluster_count

    for part, other in ((a, b), (b, a)):
        clusters: dict[int, list[int]] = {}
        for oid, cid in part.assignments.items():
            clusters.setdefault(cid, []).append(oid)
        for cid in sorted(clusters):
            members = clusters[cid]
            one_sided = [o for o in members
                         if o not in other.assignments and o not in out]
            if not one_sided:
                continue
            votes: dict[int, int] = {}
            for oid in members:
                fc = fused.assignments.get(oid)
                if fc is not None:
                    votes[fc] = votes.get(fc, 0) + 1
            if votes:
                best_count = max(votes.values())
                target = min(fc for fc, c in votes.items() if c == best_count)
                for oid in one_sided:
                    out[oid] = target
            else:
                for oid in one_sided:
                    out[oid] = next_id
                next_id += 1
    return ClusterPartition(out)


@dataclass
class StepRecord:
    """What one dimension contributed to the run, kept for inspection."""

    dim_index: int
    view: DimensionView
    graph: Optional[DecisionGraph]
    thresholds: Thresholds
    division: ClusterPartition
    fused: ClusterPartition


@dataclass
class StepSummary:
    dim_index: int
    fusion_cluster_sizes: list[int]
    finished: bool


class SdcPipeline:
    """Stepwise driver for the clustering loop.

    Construction runs normalization, enhancement and all decision graphs;
    each submit() consumes thresholds for the pending dimension, fuses, and
    advances. The HTTP service and run_sdc share this driver, which is what
    makes their outputs identical for identical threshold sequences.
    """

    def __init__(self, ds: MissingDataset, *, normalize: bool = True,
                 enhance: bool = True):
        self.dataset = normalize_min_max(ds) if normalize else ds
        fo = fully_observed(self.dataset)
        self.enhanced: Optional[FullyObservedSet] = None
        if enhance and len(fo) >= 2:
            profile = batch_density(fo.points)
            self.enhanced = apply_enhancement(fo, profile)
        self.views: list[DimensionView] = []
        self.graphs: list[Optional[DecisionGraph]] = []
        for i in range(1, self.dataset.dim_count + 1):
            view = split_dimension(self.dataset, self.enhanced, i)
            self.views.append(view)
            self.graphs.append(build_decision_graph(view) if len(view) >= 2 else None)
        self.history: list[StepRecord] = []
        self._fused: Optional[ClusterPartition] = None
        self._next_dim = 1

    @property
    def dim_count(self) -> int:
        return self.dataset.dim_count

    @property
    def finished(self) -> bool:
        return self._next_dim > self.dim_count

    @property
    def pending_dim(self) -> Optional[int]:
        return None if self.finished else self._next_dim

    def current_graph(self) -> Optional[DecisionGraph]:
        if self.finished:
            return None
        return self.graphs[self._next_dim - 1]

    def fused_cluster_count(self) -> int:
        return 0 if self._fused is None else self._fused.cluster_count

    def submit(self, thresholds: Thresholds) -> StepSummary:
        """Partition the pending dimension with ``thresholds`` and fuse."""
        if self.finished:
            raise RuntimeError("pipeline already finished")
        dim = self._next_dim
        if thresholds.dim_index != dim:
            raise ValueError(f"thresholds are for dim {thresholds.dim_index}, "
                             f"dim {dim} is pending")
        view = self.views[dim - 1]
        if len(view) < 2:
            # single-observation dimension: one cluster, no information
            division = ClusterPartition({int(o): 0 for o in view.object_ids})
        else:
            division = partition_by_thresholds(view, thresholds)
        if self._fused is None:
            fused = division
        else:
            fused = merge_missing_objects(
                partition_intersection(self._fused, division), self._fused, division
            )
        self._fused = fused
        self.history.append(StepRecord(dim, view, self.graphs[dim - 1],
                                       thresholds, division, fused))
        self._next_dim += 1
        return StepSummary(dim, fused.sizes(), self.finished)

    def result(self) -> ClusterPartition:
        if not self.finished or self._fused is None:
            raise RuntimeError("pipeline has dimensions pending")
        if len(self._fused) != self.dataset.object_count:
            raise RuntimeError("final partition does not cover every object")
        return self._fused


def run_sdc(
    ds: MissingDataset,
    threshold_provider: Optional[ThresholdProvider] = None,
    *,
    normalize: bool = True,
    enhance: bool = True,
    pipeline_out: Optional[list] = None,
) -> ClusterPartition:
    """Full automatic (or provider-driven) clustering of a missing dataset.

    The provider receives each dimension's decision graph and returns its
    thresholds; by default mountains are detected automatically. Pass a list
    as ``pipeline_out`` to receive the SdcPipeline for inspection.
    """
    provider = threshold_provider or detect_mountains_auto
    pipe = SdcPipeline(ds, normalize=normalize, enhance=enhance)
    if pipeline_out is not None:
        pipeline_out.append(pipe)
    while not pipe.finished:
        graph = pipe.current_graph()
        if graph is None:
            thresholds = Thresholds(pipe.pending_dim)
        else:
            thresholds = provider(graph)
        pipe.submit(thresholds)
    return pipe.result()
