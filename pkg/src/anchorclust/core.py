"""Core data carriers and configuration for anchor-graph clustering.

Every array that crosses a module boundary travels inside one of the frozen
dataclasses below.  Constructors validate their invariants eagerly and raise
``ValueError`` naming the violated constraint, so downstream numerical code
can assume clean inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Optional, Sequence

import numpy as np

if TYPE_CHECKING:
    from .anchors import AnchorSet
    from .spectral import BipartiteAffinity, SpectralEmbedding

# Named random streams.  Every stochastic stage draws from its own child of
# the user seed so adding or reordering one stage never shifts the others.
STREAM_ANCHORS = 0
STREAM_EMBED_INIT = 1
STREAM_LABEL_KMEANS = 2


def spawn_rng(seed: int, *path: int) -> np.random.Generator:
    """Return a generator for the named stream ``path`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(path)))


def _as_float_matrix(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(arr)


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Immutable 2-D float64 array with finite entries, row-major layout."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_float_matrix(self.data, "matrix")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def __repr__(self):
        return f"DenseMatrix(rows={self.rows}, cols={self.cols})"


def matrix_values(mat) -> np.ndarray:
    """Accept a DenseMatrix or anything array-like; return the float64 array."""
    if isinstance(mat, DenseMatrix):
        return mat.data
    return _as_float_matrix(mat, "matrix")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix with optional integer ground-truth labels.

    Samples are rows.  Labels, when present, must be one per sample;
    any integer values are accepted (metrics relabel internally).
    """

    features: DenseMatrix
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        if not isinstance(self.features, DenseMatrix):
            object.__setattr__(self, "features", DenseMatrix(self.features))
        if self.features.rows < 2:
            raise ValueError(f"a dataset needs at least 2 samples, got {self.features.rows}")
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.ndim != 1:
                raise ValueError(f"labels must be 1-dimensional, got shape {lab.shape}")
            if lab.shape[0] != self.features.rows:
                raise ValueError(
                    f"labels length {lab.shape[0]} does not match "
                    f"sample count {self.features.rows}"
                )
            if not np.issubdtype(lab.dtype, np.integer):
                if not np.all(lab == np.round(lab)):
                    raise ValueError("labels must be integers")
            lab = np.ascontiguousarray(lab, dtype=np.int64)
            lab.flags.writeable = False
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.features.rows

    @property
    def d(self) -> int:
        return self.features.cols


@dataclass(frozen=True, eq=False)
class ViewCollection:
    """Two or more feature views of the same samples.

    Views share the sample count and ordering; feature dimensions may
    differ.  Labels, when present, are shared across views.
    """

    views: tuple
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        views = tuple(
            v if isinstance(v, Dataset)
            else Dataset(v if isinstance(v, DenseMatrix) else DenseMatrix(v))
            for v in self.views
        )
        if len(views) < 2:
            raise ValueError(f"a view collection needs at least 2 views, got {len(views)}")
        n = views[0].n
        for i, v in enumerate(views):
            if v.n != n:
                raise ValueError(
                    f"view length mismatch: view {i} has {v.n} samples "
                    f"but view 0 has {n}"
                )
        object.__setattr__(self, "views", views)
        labels = self.labels
        if labels is None:
            for v in views:
                if v.labels is not None:
                    labels = v.labels
                    break
        if labels is not None:
            lab = np.ascontiguousarray(np.asarray(labels), dtype=np.int64)
            if lab.shape != (n,):
                raise ValueError(
                    f"labels shape {lab.shape} does not match sample count {n}"
                )
            lab.flags.writeable = False
        object.__setattr__(self, "labels", labels if labels is None else lab)

    @property
    def n(self) -> int:
        return self.views[0].n

    @property
    def view_count(self) -> int:
        return len(self.views)


@dataclass(frozen=True)
class SolverConfig:
    """All tunables for a fit.  Frozen so a model can carry its exact recipe.

    k: number of clusters (>= 2)
    m: number of anchors (k <= m <= n)
    alpha: ridge weight on the affinity entries (>= 0)
    beta: weight of the connectivity penalty (>= 0)
    gamma: view-weight exponent for multi-view fits (< 0)
    tol: relative objective-change stopping threshold (> 0)
    max_iter: cap on alternating iterations (>= 1)
    qp_tol: KKT residual target for the per-row simplex QPs (> 0)
    degree_eps: floor applied to anchor degrees before scaling (> 0)
    kmeans_max_iter: cap on Lloyd iterations for anchor selection / label
        extraction (>= 1)
    seed: master seed; every random stage uses a named child stream
    """

    k: int
    m: int
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = -1.0
    tol: float = 1e-6
    max_iter: int = 50
    qp_tol: float = 1e-8
    degree_eps: float = 1e-12
    kmeans_max_iter: int = 300
    seed: int = 0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ValueError(f"k must be an integer >= 2, got {self.k}")
        if int(self.m) != self.m or self.m < self.k:
            raise ValueError(f"m must be \u2265 k (k={self.k}), got m={self.m}")
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not np.isfinite(self.gamma) or self.gamma >= 0:
            raise ValueError(f"gamma must be negative, got {self.gamma}")
        if not np.isfinite(self.tol) or self.tol <= 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be an integer >= 1, got {self.max_iter}")
        if not np.isfinite(self.qp_tol) or self.qp_tol <= 0:
            raise ValueError(f"qp_tol must be > 0, got {self.qp_tol}")
        if not np.isfinite(self.degree_eps) or self.degree_eps <= 0:
            raise ValueError(f"degree_eps must be > 0, got {self.degree_eps}")
        if int(self.kmeans_max_iter) != self.kmeans_max_iter or self.kmeans_max_iter < 1:
            raise ValueError(
                f"kmeans_max_iter must be an integer >= 1, got {self.kmeans_max_iter}"
            )
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed}")

    def to_dict(self) -> dict:
        return {
            "k": int(self.k),
            "m": int(self.m),
            "alpha": float(self.alpha),
            "beta": float(self.beta),
            "gamma": float(self.gamma),
            "tol": float(self.tol),
            "max_iter": int(self.max_iter),
            "qp_tol": float(self.qp_tol),
            "degree_eps": float(self.degree_eps),
            "kmeans_max_iter": int(self.kmeans_max_iter),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        missing = {"k", "m"} - set(d)
        if missing:
            raise ValueError(f"config missing required fields: {sorted(missing)}")
        return cls(**d)


def validate_config(config: SolverConfig, data) -> None:
    """Check ``config`` against a Dataset, ViewCollection, or view sequence.

    Raises ValueError when the anchor count exceeds the sample count or the
    cluster count exceeds the anchor count.
    """
    if not isinstance(config, SolverConfig):
        raise ValueError("config must be a SolverConfig")
    if isinstance(data, ViewCollection):
        n = data.n
    elif isinstance(data, Dataset):
        n = data.n
    elif isinstance(data, Sequence):
        views = [v if isinstance(v, Dataset) else Dataset(DenseMatrix(v)) for v in data]
        if not views:
            raise ValueError("empty view sequence")
        n = views[0].n
        for i, v in enumerate(views):
            if v.n != n:
                raise ValueError(
                    f"view {i} has {v.n} samples but view 0 has {n}"
                )
    else:
        raise ValueError(f"unsupported data container: {type(data).__name__}")
    if config.m > n:
        raise ValueError(f"m={config.m} anchors exceed n={n} samples")
    if config.k > config.m:
        raise ValueError(f"k={config.k} clusters exceed m={config.m} anchors")


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Everything a fit produced: anchors, affinity, embedding, labels, trace.

    ``anchors`` holds one AnchorSet per view (length 1 for single-view fits)
    and ``view_weights`` the final per-view weights (``[1.0]`` single-view).
    The objective trace must be nonincreasing up to the configured tolerance.
    """

    anchors: tuple
    affinity: "BipartiteAffinity"
    embedding: "SpectralEmbedding"
    sample_labels: np.ndarray
    anchor_labels: np.ndarray
    view_weights: np.ndarray
    objective_trace: np.ndarray
    config: SolverConfig
    metrics: Optional[dict] = None

    def __post_init__(self):
        if self.metrics is not None:
            if not isinstance(self.metrics, dict):
                raise ValueError("metrics must be a dict of named scores or None")
            clean = {}
            for key, val in self.metrics.items():
                val = float(val)
                if not np.isfinite(val):
                    raise ValueError(f"metric {key!r} must be finite, got {val}")
                clean[str(key)] = val
            object.__setattr__(self, "metrics", clean)
        object.__setattr__(self, "anchors", tuple(self.anchors))
        sl = np.ascontiguousarray(np.asarray(self.sample_labels), dtype=np.int64)
        al = np.ascontiguousarray(np.asarray(self.anchor_labels), dtype=np.int64)
        vw = np.ascontiguousarray(np.asarray(self.view_weights), dtype=np.float64)
        tr = np.ascontiguousarray(np.asarray(self.objective_trace), dtype=np.float64)
        k = self.config.k
        for name, lab in (("sample_labels", sl), ("anchor_labels", al)):
            if lab.ndim != 1:
                raise ValueError(f"{name} must be 1-dimensional")
            if lab.size and (lab.min() < 0 or lab.max() >= k):
                raise ValueError(f"{name} must lie in [0, {k - 1}]")
        if vw.ndim != 1 or vw.size != len(self.anchors):
            raise ValueError("view_weights must have one entry per view")
        if np.any(vw < 0):
            raise ValueError("view_weights must be nonnegative")
        if tr.ndim != 1 or tr.size < 1:
            raise ValueError("objective_trace must be a non-empty vector")
        # slack floor 1e-9: the connectivity term re-normalizes by current
        # anchor degrees, so exact monotonicity holds only up to that drift
        slack = max(self.config.tol, 1e-9) * np.maximum(np.abs(tr[:-1]), 1e-12)
        if np.any(tr[1:] > tr[:-1] + slack):
            worst = int(np.argmax(tr[1:] - tr[:-1] - slack))
            raise ValueError(
                "objective_trace increases beyond tolerance at iteration "
                f"{worst + 1}: {tr[worst]} -> {tr[worst + 1]}"
            )
        for arr in (sl, al, vw, tr):
            arr.flags.writeable = False
        object.__setattr__(self, "sample_labels", sl)
        object.__setattr__(self, "anchor_labels", al)
        object.__setattr__(self, "view_weights", vw)
        object.__setattr__(self, "objective_trace", tr)

    @property
    def n(self) -> int:
        return self.sample_labels.shape[0]

    @property
    def m(self) -> int:
        return self.anchor_labels.shape[0]

    @property
    def view_count(self) -> int:
        return len(self.anchors)


ProgressCallback = Callable[["FitState"], None]  # FitState lives in single_view
