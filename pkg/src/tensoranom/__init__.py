"""Robust low-rank + sparse tensor decomposition with graph smoothness
regularizers, statistical anomaly scoring, synthetic benchmarks, and
evaluation tooling for spatiotemporal anomaly detection."""

from .dtf import read_tensor, write_tensor
from .evaluate import (
    EvalReport,
    EventList,
    SearchSpec,
    auc_roc,
    evaluate_scores,
    f1_at,
    random_search,
    topk_detected,
)
from .graphs import (
    GraphOperators,
    SpatialGraph,
    build_operators,
    cyclic_diff_operator,
    diff_operator,
    grid_graph,
    k_hop_neighborhood,
    knn_graph,
    load_graph_csv,
    save_graph_csv,
)
from .prox import SvtResult, soft_threshold, svt
from .scoring import (
    ScoreField,
    ScoringConfig,
    abs_scores,
    block_weights,
    extract_blocks,
    location_moments,
    nll_scores,
    threshold,
)
from .solver import (
    DecompositionResult,
    FastSolveCache,
    SolverConfig,
    apply_variant,
    build_fast_solve,
    decompose,
    objective,
    solve_smoothing_system,
)
from .synth import LabeledDataset, SynthConfig, empirical_snr, generate
from .tensors import (
    ModeUnfolding,
    axpy,
    fold,
    fold_matrix,
    frobenius_norm,
    hadamard,
    inner,
    l1_norm,
    lp_norm,
    mode_product,
    permute_modes,
    unfold,
)

__version__ = "0.1.0"
