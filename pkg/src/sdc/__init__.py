"""Parameter-free density clustering for datasets with missing values."""

from .dataset import (
    DatasetError,
    DegenerateDataError,
    DimensionView,
    FullyObservedSet,
    MissingDataset,
    fully_observed,
    inject_mar,
    load_csv,
    normalize_min_max,
    split_dimension,
)
from .density import DensityProfile, batch_density, brute_force_density, compute_radius
from .enhance import apply_enhancement, gravitational_force, low_density_mask
from .metrics import ari, nmi, purity
from .partition import (
    ClusterPartition,
    DecisionGraph,
    SdcPipeline,
    Thresholds,
    build_decision_graph,
    detect_mountains_auto,
    merge_missing_objects,
    partition_by_thresholds,
    partition_intersection,
    run_sdc,
)
from .spatial import NeighborList, k_nearest, nn_distances

__version__ = "0.1.0"

__all__ = [
    "DatasetError",
    "DegenerateDataError",
    "MissingDataset",
    "DimensionView",
    "FullyObservedSet",
    "load_csv",
    "normalize_min_max",
    "split_dimension",
    "fully_observed",
    "inject_mar",
    "NeighborList",
    "nn_distances",
    "k_nearest",
    "DensityProfile",
    "compute_radius",
    "batch_density",
    "brute_force_density",
    "low_density_mask",
    "gravitational_force",
    "apply_enhancement",
    "DecisionGraph",
    "Thresholds",
    "ClusterPartition",
    "build_decision_graph",
    "detect_mountains_auto",
    "partition_by_thresholds",
    "partition_intersection",
    "merge_missing_objects",
    "SdcPipeline",
    "run_sdc",
    "purity",
    "ari",
    "nmi",
    "__version__",
]
