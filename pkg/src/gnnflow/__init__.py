"""gnnflow: latency modeling, prediction, and scheduling for GNN accelerator dataflows.

Pipeline: generate graphs -> label with the analytical cycle oracle ->
extract features -> train per-config boosted-tree regressors -> rank
dataflow configs per graph -> drive online scheduling across heterogeneous
accelerators. See the CLI (``gnnflow --help``) for the end-to-end flow.
"""

from ._kernels import BACKEND
from ._util import (
    CoverageError,
    FormatError,
    GenerationError,
    GnnflowError,
    ParseError,
    SchemaError,
)
from .graphs import DegreeStats, Graph, clustering_coefficient, degree_stats, density
from .graphs import load_edge_list, load_matrix_market, save_edge_list
from .oracle import (
    AcceleratorParams,
    DataflowConfig,
    LatencyRecord,
    ResolvedTiling,
    WorkloadDims,
    aggregation_cycles,
    combination_cycles,
    enumerate_configs,
    label_dataset,
    resolve_tiling,
    simulate_latency,
)
from .features import FeatureVector, build_feature_table, extract_features, feature_matrix
from .gbm import (
    GbmModel,
    PredictorBank,
    SplitSpec,
    TrainParams,
    load_bank,
    predict,
    save_bank,
    split_dataset,
    train_bank,
    train_gbm,
)
from .selector import EvalReport, RankedConfigs, evaluate_bank, mape, rank_configs, topk_accuracy
from .scheduler import (
    AcceleratorUnit,
    ArrivalSpec,
    Job,
    ScheduleTrace,
    SchedMetrics,
    compare_strategies,
    generate_arrivals,
    metrics,
    run_schedule,
)
from .synth import SyntheticSpec, generate_synthetic

__version__ = "0.1.0"
