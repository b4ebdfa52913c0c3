"""Multi-view alternating solver with self-tuned view weights.

All views share one affinity matrix Z and one embedding; each view keeps
its own anchors.  View weights follow a power rule with negative exponent
gamma: lambda_v = (-h_v / gamma)^(1/(gamma-1)) for view loss h_v, which is
the exact minimizer of  sum_v lambda_v h_v + sum_v lambda_v^gamma  at fixed
losses.  Noisier views (larger h_v) therefore receive smaller weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .anchors import select_anchors
from .core import (
    ClusterModel,
    Dataset,
    DenseMatrix,
    ProgressCallback,
    SolverConfig,
    STREAM_ANCHORS,
    ViewCollection,
    matrix_values,
    spawn_rng,
    validate_config,
)
from .simplex_qp import SimplexQP, solve_rows
from .single_view import FitState, _initial_embedding, extract_labels
from .spectral import (
    BipartiteAffinity,
    SpectralEmbedding,
    degrees,
    pairwise_w,
    scaled_affinity,
    top_k_embedding,
)

LOSS_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ViewWeights:
    """Per-view weights produced by the power rule; all nonnegative."""

    lambdas: np.ndarray
    gamma: float

    def __post_init__(self):
        lam = np.ascontiguousarray(np.asarray(self.lambdas, dtype=np.float64))
        if lam.ndim != 1 or lam.size < 1:
            raise ValueError("lambdas must be a non-empty vector")
        if not np.all(np.isfinite(lam)) or np.any(lam < 0):
            raise ValueError("view weights must be finite and nonnegative")
        if self.gamma >= 0:
            raise ValueError(f"gamma must be < 0, got {self.gamma}")
        lam.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)


def view_loss(x, a, zg: BipartiteAffinity) -> float:
    """Reconstruction loss of one view: ||X - Z A||_F^2."""
    xd = matrix_values(x)
    ad = matrix_values(a)
    resid = xd - zg.z.data @ ad
    return float(np.einsum("ij,ij->", resid, resid))


def update_weights(losses, gamma: float) -> ViewWeights:
    """Closed-form weight update; losses are floored at LOSS_FLOOR.

    Solves the stationarity condition  h_v + gamma * lambda_v^(gamma-1) = 0.
    """
    h = np.maximum(np.asarray(losses, dtype=np.float64), LOSS_FLOOR)
    if h.ndim != 1 or h.size < 1:
        raise ValueError("losses must be a non-empty vector")
    if gamma >= 0:
        raise ValueError(f"gamma must be < 0, got {gamma}")
    lam = np.power(-h / gamma, 1.0 / (gamma - 1.0))
    return ViewWeights(lambdas=lam, gamma=float(gamma))


def build_multiview_row_qp(views, anchor_mats, w: np.ndarray, weights,
                           alpha: float, beta: float, row_index: int) -> SimplexQP:
    """Weighted row QP: H = sum_v lambda_v A_v A_v' + alpha I."""
    xs = [matrix_values(v.features if isinstance(v, Dataset) else v) for v in views]
    anchors = [matrix_values(getattr(a, "centers", a)) for a in anchor_mats]
    lam = np.asarray(getattr(weights, "lambdas", weights), dtype=np.float64)
    if not (len(xs) == len(anchors) == lam.size):
        raise ValueError("views, anchors, and weights must align")
    m = anchors[0].shape[0]
    hess = alpha * np.eye(m)
    lin = np.zeros(m)
    for xv, av, lv in zip(xs, anchors, lam):
        hess += lv * (av @ av.T)
        lin += -2.0 * lv * (av @ xv[row_index])
    w = np.asarray(w, dtype=np.float64)
    lin = lin + beta * w[row_index]
    return SimplexQP(hessian=DenseMatrix(hess), linear=lin)


def objective_msgl(views, anchor_mats, zg: BipartiteAffinity,
                   emb: SpectralEmbedding, weights, alpha: float, beta: float,
                   gamma: float | None = None, degree_eps: float = 1e-12) -> float:
    """Weighted objective: sum_v lambda_v h_v + ridge + connectivity + sum_v lambda_v^gamma.

    ``weights`` may be a ViewWeights (gamma taken from it) or a bare vector,
    in which case ``gamma`` must be supplied.
    """
    if isinstance(weights, ViewWeights):
        gamma = weights.gamma
    elif gamma is None:
        raise ValueError("gamma required when weights is a bare vector")
    lam = np.asarray(getattr(weights, "lambdas", weights), dtype=np.float64)
    zd = zg.z.data
    value = alpha * float(np.einsum("ij,ij->", zd, zd))
    for v, (view, a) in enumerate(zip(views, anchor_mats)):
        x = view.features if isinstance(view, Dataset) else view
        a = getattr(a, "centers", a)
        value += lam[v] * view_loss(x, a, zg)
    if beta != 0.0:
        w = pairwise_w(emb, degrees(zg, degree_eps))
        value += beta * float(np.einsum("ij,ij->", zd, w))
    value += float(np.sum(np.power(lam, gamma)))
    return value


def _coerce_views(views) -> list[Dataset]:
    if isinstance(views, ViewCollection):
        return list(views.views)
    if isinstance(views, Dataset):
        return [views]
    out = []
    for v in views:
        out.append(v if isinstance(v, Dataset) else Dataset(DenseMatrix(matrix_values(v))))
    if not out:
        raise ValueError("need at least one view")
    n = out[0].n
    for i, v in enumerate(out):
        if v.n != n:
            raise ValueError(f"view {i} has {v.n} samples but view 0 has {n}")
    return out


def fit_multi_view(views, config: SolverConfig,
                   progress: ProgressCallback | None = None) -> ClusterModel:
    """Fit a shared affinity across views with self-tuned view weights.

    Args:
        views: ViewCollection, or a sequence of Datasets / matrices sharing
            the sample axis (a single view is accepted and reduces to the
            single-view fit with unit weight).
        config: solver configuration; gamma controls weight spread.
        progress: optional callback receiving an FitState per iteration.

    Returns:
        ClusterModel with one AnchorSet per view and the final view weights.

    Each iteration updates Z (warm-started row QPs), then the embedding,
    then the weights; the recorded objective includes the weight penalty
    sum_v lambda_v^gamma.
    """
    view_list = _coerce_views(views)
    validate_config(config, view_list)
    c = len(view_list)
    n = view_list[0].n
    m, k = config.m, config.k

    # every view draws its anchor seeding from the same stream so that
    # identical views produce identical anchors (and hence equal weights)
    anchor_sets = tuple(
        select_anchors(ds, m, max_iter=config.kmeans_max_iter,
                       rng=spawn_rng(config.seed, STREAM_ANCHORS, 0))
        for ds in view_list
    )
    avs = [a.centers.data for a in anchor_sets]
    grams = [av @ av.T for av in avs]
    crosses = [ds.features.data @ av.T for ds, av in zip(view_list, avs)]

    lam = np.full(c, 1.0 / c)
    weights = ViewWeights(lambdas=lam, gamma=config.gamma)
    zg = BipartiteAffinity(DenseMatrix(np.full((n, m), 1.0 / m)))
    deg = degrees(zg, config.degree_eps)
    emb = _initial_embedding(n, m, k, config.seed)

    eye = np.eye(m)
    trace: list[float] = []
    for it in range(config.max_iter):
        w = pairwise_w(emb, deg) if config.beta != 0.0 else None
        hess = config.alpha * eye
        flin = np.zeros((n, m))
        for lv, gv, cv in zip(weights.lambdas, grams, crosses):
            hess = hess + lv * gv
            flin += -2.0 * lv * cv
        if w is not None:
            flin += config.beta * w
        z = solve_rows(hess, flin, z0=zg.z.data, qp_tol=config.qp_tol)
        zg_new = BipartiteAffinity(DenseMatrix(z))
        deg_new = degrees(zg_new, config.degree_eps)
        emb_new = top_k_embedding(scaled_affinity(zg_new, deg_new), k)
        if c > 1:
            losses = [view_loss(ds.features, av, zg_new)
                      for ds, av in zip(view_list, avs)]
            weights_new = update_weights(losses, config.gamma)
        else:
            # degenerate single view: lambda stays 1, so the trajectory is
            # the single-view one and the weight penalty is the constant 1
            weights_new = weights
        value = objective_msgl(view_list, anchor_sets, zg_new, emb_new, weights_new,
                               config.alpha, config.beta,
                               degree_eps=config.degree_eps)
        if trace and value > trace[-1]:
            # monotone safeguard: degree re-normalization drift can outweigh
            # descent near a fixed point.  Keep the previous state and stop.
            trace.append(trace[-1])
            if progress is not None:
                progress(FitState(zg, emb, trace[-1], it))
            break
        zg, deg, emb, weights = zg_new, deg_new, emb_new, weights_new
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
        anchors=anchor_sets,
        affinity=zg,
        embedding=emb,
        sample_labels=sample_labels,
        anchor_labels=anchor_labels,
        view_weights=weights.lambdas,
        objective_trace=np.asarray(trace),
        config=config,
    )
