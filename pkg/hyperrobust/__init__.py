"""
hyperrobust - hypergraph connectivity robustness

Generates synthetic hypergraphs, labels their robustness under targeted and
cascading-failure attacks by adaptive integration of the percolation curve,
and trains an injective hypergraph message-passing network as a fast
surrogate whose expressiveness is checked against Weisfeiler-Lehman
refinement.
"""

__version__ = "0.1.0"

# Structures
from hyperrobust.hypergraph import (
    ActivityMask,
    Hypergraph,
    component_labels,
    from_edge_list,
    lcc_fraction,
    recompute_edge_liveness,
)

# Synthetic families
from hyperrobust.generators import (
    Family,
    GeneratorConfig,
    gen_er,
    gen_sbm,
    gen_sf,
    gen_uf,
    gen_ws,
    generate,
)

# Attacks and labels
from hyperrobust.cascade import (
    AttackKind,
    AttackSpec,
    CascadeParams,
    CascadeState,
    dynamic_failure_order,
    fail_and_redistribute,
    init_cascade,
    percolation_sample,
    run_cascade,
    static_attack_order,
)
from hyperrobust.robustness import (
    PercolationSampler,
    QuadratureConfig,
    QuadratureStats,
    adaptive_simpson,
    label_hypergraph,
    robustness_discrete,
)

# Expressiveness
from hyperrobust.hwl import (
    Verdict,
    WLColoring,
    WLHistogram,
    histogram,
    hwl_compare,
    hwl_distinguish,
    hwl_refine,
)

# Surrogate model
from hyperrobust.model import (
    AggregationMode,
    FeatureSet,
    ModelParameters,
    TrainingSample,
    build_features,
    forward,
    load_model,
    loss_and_grad,
    predict,
    save_model,
)
from hyperrobust.training import TrainConfig, cosine_lr, train

# Pipeline
from hyperrobust.config import PipelineConfig, load_config
from hyperrobust.dataset import SampleRecord, dataset_generate, read_jsonl, write_jsonl
from hyperrobust.evaluation import BenchReport, EvalReport, bench, evaluate
from hyperrobust.errors import HyperRobustError

__all__ = [
    "__version__",
    # Structures
    "ActivityMask",
    "Hypergraph",
    "component_labels",
    "from_edge_list",
    "lcc_fraction",
    "recompute_edge_liveness",
    # Synthetic families
    "Family",
    "GeneratorConfig",
    "gen_er",
    "gen_sbm",
    "gen_sf",
    "gen_uf",
    "gen_ws",
    "generate",
    # Attacks and labels
    "AttackKind",
    "AttackSpec",
    "CascadeParams",
    "CascadeState",
    "dynamic_failure_order",
    "fail_and_redistribute",
    "init_cascade",
    "percolation_sample",
    "run_cascade",
    "static_attack_order",
    "PercolationSampler",
    "QuadratureConfig",
    "QuadratureStats",
    "adaptive_simpson",
    "label_hypergraph",
    "robustness_discrete",
    # Expressiveness
    "Verdict",
    "WLColoring",
    "WLHistogram",
    "histogram",
    "hwl_compare",
    "hwl_distinguish",
    "hwl_refine",
    # Surrogate model
    "AggregationMode",
    "FeatureSet",
    "ModelParameters",
    "TrainingSample",
    "build_features",
    "forward",
    "load_model",
    "loss_and_grad",
    "predict",
    "save_model",
    "TrainConfig",
    "cosine_lr",
    "train",
    # Pipeline
    "PipelineConfig",
    "load_config",
    "SampleRecord",
    "dataset_generate",
    "read_jsonl",
    "write_jsonl",
    "BenchReport",
    "EvalReport",
    "bench",
    "evaluate",
    "HyperRobustError",
]
