"""Random-subset feature selection with distance- and topology-preservation scoring."""

__version__ = "0.1.0"

from .dataset import (
    DataMatrix,
    LabelVector,
    load_csv,
    select_features,
    standardize,
    write_csv,
)
from .diagram_metrics import bottleneck, matching_oracle, wasserstein
from .distance import (
    DistanceMatrix,
    FeatureSubset,
    SquaredDistanceAccumulator,
    distance_matrix,
    norm_l1,
    norm_l2,
    norm_linf,
)
from .engine import (
    FeatureRanking,
    IvfsConfig,
    ScoreBoard,
    default_config,
    exhaustive_inclusion_value,
    read_ranking,
    run_ivfs,
    subset_score,
    write_ranking,
)
from .evaluation import (
    EvalReport,
    StabilityResult,
    TopoMetrics,
    best_per_metric,
    bootstrap_stability,
    evaluate_subset,
    knn_accuracy,
    run_grid,
    topo_metrics,
)
from .persistence import (
    PersistenceDiagram,
    RipsFiltration,
    build_filtration,
    persistence_h0,
    persistence_h1,
    persistence_oracle,
    read_diagram,
    threshold_diagram,
    write_diagram,
)

__all__ = [
    "DataMatrix",
    "LabelVector",
    "load_csv",
    "select_features",
    "standardize",
    "write_csv",
    "DistanceMatrix",
    "FeatureSubset",
    "SquaredDistanceAccumulator",
    "distance_matrix",
    "norm_l1",
    "norm_l2",
    "norm_linf",
    "PersistenceDiagram",
    "RipsFiltration",
    "build_filtration",
    "persistence_h0",
    "persistence_h1",
    "persistence_oracle",
    "threshold_diagram",
    "read_diagram",
    "write_diagram",
    "bottleneck",
    "wasserstein",
    "matching_oracle",
    "IvfsConfig",
    "FeatureRanking",
    "ScoreBoard",
    "default_config",
    "run_ivfs",
    "subset_score",
    "exhaustive_inclusion_value",
    "read_ranking",
    "write_ranking",
    "EvalReport",
    "StabilityResult",
    "TopoMetrics",
    "knn_accuracy",
    "topo_metrics",
    "evaluate_subset",
    "bootstrap_stability",
    "run_grid",
    "best_per_metric",
]
