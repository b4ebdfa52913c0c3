"""Anchor-graph subspace clustering.

Learns a row-stochastic sample-anchor affinity whose bipartite graph is
pushed toward exactly k connected components by a spectral penalty, for one
feature view or several views with self-tuned weights.  New points are
labeled by nearest-anchor voting without touching the training samples.
"""

from .anchors import AnchorSet, kmeans, select_anchors
from .core import (
    ClusterModel,
    Dataset,
    DenseMatrix,
    SolverConfig,
    ViewCollection,
    validate_config,
)
from .datagen import gaussian_blobs, random_noise, union_of_subspaces
from .io import ingest, load_model, save_model
from .metrics import ContingencyTable, accuracy, evaluate, nmi, purity
from .multi_view import (
    ViewWeights,
    build_multiview_row_qp,
    fit_multi_view,
    objective_msgl,
    update_weights,
    view_loss,
)
from .oos import OosPredictor, build_predictor, predict
from .simplex_qp import SimplexQP, kkt_residual, project_simplex, solve, solve_rows
from .single_view import (
    FitState,
    build_row_qp,
    extract_labels,
    fit_single_view,
    objective,
)
from .spectral import (
    BipartiteAffinity,
    DegreeInfo,
    SpectralEmbedding,
    component_count,
    degrees,
    pairwise_w,
    scaled_affinity,
    top_k_embedding,
    trace_objective,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorSet",
    "BipartiteAffinity",
    "ClusterModel",
    "ContingencyTable",
    "Dataset",
    "DegreeInfo",
    "DenseMatrix",
    "OosPredictor",
    "SimplexQP",
    "FitState",
    "SolverConfig",
    "SpectralEmbedding",
    "ViewCollection",
    "ViewWeights",
    "accuracy",
    "build_multiview_row_qp",
    "build_predictor",
    "build_row_qp",
    "component_count",
    "degrees",
    "evaluate",
    "extract_labels",
    "fit_multi_view",
    "fit_single_view",
    "gaussian_blobs",
    "ingest",
    "kkt_residual",
    "kmeans",
    "load_model",
    "nmi",
    "objective",
    "objective_msgl",
    "pairwise_w",
    "predict",
    "project_simplex",
    "purity",
    "random_noise",
    "save_model",
    "scaled_affinity",
    "select_anchors",
    "solve",
    "solve_rows",
    "top_k_embedding",
    "trace_objective",
    "union_of_subspaces",
    "update_weights",
    "validate_config",
    "view_loss",
]
