"""Single-view alternating solver.

Minimizes  ||X - Z A||_F^2 + alpha ||Z||_F^2 + beta * sum_ij Z_ij W_ij(F)
over row-stochastic Z and spectral frames F.  Each outer iteration solves
all row QPs against the W implied by the previous iterate (warm-started, so
the surrogate never increases), then recomputes the embedding exactly from
the new Z.  The recorded objective uses the updated embedding and degrees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .anchors import kmeans, select_anchors
from .core import (
    ClusterModel,
    Dataset,
    DenseMatrix,
    ProgressCallback,
    SolverConfig,
    STREAM_ANCHORS,
    STREAM_EMBED_INIT,
    STREAM_LABEL_KMEANS,
    matrix_values,
    spawn_rng,
    validate_config,
)
from .simplex_qp import SimplexQP, solve_rows
from .spectral import (
    BipartiteAffinity,
    SpectralEmbedding,
    degrees,
    pairwise_w,
    scaled_affinity,
    top_k_embedding,
)

LABEL_KMEANS_RESTARTS = 10


@dataclass(frozen=True)
class FitState:
    """Snapshot of one outer iteration: (Z, F, objective, iteration index).

    Progress callbacks receive these, one per recorded iteration.
    """

    affinity: BipartiteAffinity
    embedding: SpectralEmbedding
    objective: float
    iteration: int

    def __post_init__(self):
        if not np.isfinite(self.objective) or self.objective < 0:
            raise ValueError(
                f"objective must be finite and >= 0, got {self.objective}"
            )
        if self.iteration < 0:
            raise ValueError(f"iteration must be >= 0, got {self.iteration}")


def objective(x, a, zg: BipartiteAffinity, emb: SpectralEmbedding,
              alpha: float, beta: float, degree_eps: float = 1e-12) -> float:
    """Full objective at (Z, F): reconstruction + ridge + connectivity."""
    xd = matrix_values(x)
    ad = matrix_values(a)
    zd = zg.z.data
    resid = xd - zd @ ad
    value = float(np.einsum("ij,ij->", resid, resid))
    value += alpha * float(np.einsum("ij,ij->", zd, zd))
    if beta != 0.0:
        w = pairwise_w(emb, degrees(zg, degree_eps))
        value += beta * float(np.einsum("ij,ij->", zd, w))
    return value


def build_row_qp(x, a, w: np.ndarray, alpha: float, beta: float,
                 row_index: int) -> SimplexQP:
    """Simplex QP for one affinity row: H = A A' + alpha I, f = -2 A x_i + beta W_i."""
    xd = matrix_values(x)
    ad = matrix_values(a)
    if not 0 <= row_index < xd.shape[0]:
        raise ValueError(f"row_index {row_index} out of range [0, {xd.shape[0]})")
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (xd.shape[0], ad.shape[0]):
        raise ValueError(
            f"W shape {w.shape} does not match ({xd.shape[0]}, {ad.shape[0]})"
        )
    hess = ad @ ad.T + alpha * np.eye(ad.shape[0])
    lin = -2.0 * (ad @ xd[row_index]) + beta * w[row_index]
    return SimplexQP(hessian=DenseMatrix(hess), linear=lin)


def _initial_embedding(n: int, m: int, k: int, seed: int) -> SpectralEmbedding:
    rng = spawn_rng(seed, STREAM_EMBED_INIT)
    frame = np.linalg.qr(rng.standard_normal((n + m, k)))[0]
    return SpectralEmbedding(
        u_block=DenseMatrix(frame[:n]),
        v_block=DenseMatrix(frame[n:]),
        singular_values=np.ones(k),
    )


def extract_labels(emb: SpectralEmbedding, k: int, seed: int,
                   max_iter: int = 300,
                   restarts: int = LABEL_KMEANS_RESTARTS) -> tuple[np.ndarray, np.ndarray]:
    """Cluster the stacked embedding rows; returns (sample_labels, anchor_labels).

    Runs ``restarts`` seeded k-means replicates and keeps the lowest-SSE run
    (ties to the earliest replicate).
    """
    stacked = np.vstack([emb.u_block.data, emb.v_block.data])
    best = None
    for r in range(restarts):
        rng = spawn_rng(seed, STREAM_LABEL_KMEANS, r)
        res = kmeans(stacked, k, max_iter=max_iter, rng=rng)
        if best is None or res.sse < best.sse:
            best = res
    n = emb.u_block.rows
    return best.assignments[:n].copy(), best.assignments[n:].copy()


def fit_single_view(data, config: SolverConfig,
                    progress: ProgressCallback | None = None) -> ClusterModel:
    """Alternate affinity and embedding updates until the objective settles.

    Args:
        data: Dataset (or matrix) of samples, rows as points.
        config: solver configuration; gamma is ignored for single views.
        progress: optional callback receiving an FitState after each
            recorded outer iteration.

    Returns:
        ClusterModel with one AnchorSet, the learned affinity, embedding,
        labels for samples and anchors, and the objective trace.
    """
    if not isinstance(data, Dataset):
        data = Dataset(DenseMatrix(matrix_values(data)))
    validate_config(config, data)
    x = data.features.data
    n = x.shape[0]
    m, k = config.m, config.k

    anchor_set = select_anchors(
        data, m, max_iter=config.kmeans_max_iter,
        rng=spawn_rng(config.seed, STREAM_ANCHORS, 0),
    )
    a = anchor_set.centers.data
    hess = a @ a.T + config.alpha * np.eye(m)
    cross = x @ a.T

    zg = BipartiteAffinity(DenseMatrix(np.full((n, m), 1.0 / m)))
    deg = degrees(zg, config.degree_eps)
    emb = _initial_embedding(n, m, k, config.seed)

    trace: list[float] = []
    for it in range(config.max_iter):
        w = pairwise_w(emb, deg) if config.beta != 0.0 else None
        flin = -2.0 * cross
        if w is not None:
            flin = flin + config.beta * w
        z = solve_rows(hess, flin, z0=zg.z.data, qp_tol=config.qp_tol)
        zg_new = BipartiteAffinity(DenseMatrix(z))
        deg_new = degrees(zg_new, config.degree_eps)
        emb_new = top_k_embedding(scaled_affinity(zg_new, deg_new), k)
        value = objective(x, a, zg_new, emb_new,
                          config.alpha, config.beta, config.degree_eps)
        if trace and value > trace[-1]:
            # monotone safeguard: the connectivity term re-normalizes by the
            # new anchor degrees, which near a fixed point can outweigh the
            # row-QP descent.  Keep the previous state and stop.
            trace.append(trace[-1])
            if progress is not None:
                progress(FitState(zg, emb, trace[-1], it))
            break
        zg, deg, emb = zg_new, deg_new, emb_new
        trace.append(value)
        if progress is not None:
            progress(FitState(zg, emb, value, it))
        if it > 0:
            prev = trace[-2]
            if abs(prev - value) < config.tol * max(abs(prev), 1e-12):
                break

    sample_labels, anchor_labels = extract_labels(
        emb, k, config.seed, max_iter=config.kmeans_max_iter)
    return ClusterModel(
        anchors=(anchor_set,),
        affinity=zg,
        embedding=emb,
        sample_labels=sample_labels,
        anchor_labels=anchor_labels,
        view_weights=np.array([1.0]),
        objective_trace=np.asarray(trace),
        config=config,
    )
