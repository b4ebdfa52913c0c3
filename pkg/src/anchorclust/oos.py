"""Out-of-sample label assignment.

New points never touch training samples: each point is compared to the m
labeled anchors only, so prediction costs O(m d) per point.  Labels come
from a majority vote over the k nearest anchors with a fully deterministic
tie policy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ClusterModel, Dataset, DenseMatrix, matrix_values


def anchor_sq_dists(points: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances from each point to each anchor, (n', m)."""
    pp = np.einsum("ij,ij->i", points, points)[:, None]
    aa = np.einsum("ij,ij->i", anchors, anchors)[None, :]
    d2 = pp + aa - 2.0 * (points @ anchors.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


@dataclass(frozen=True, eq=False)
class OosPredictor:
    """Frozen anchor coordinates, anchor labels, and vote size.

    ``anchor_coords`` holds one DenseMatrix per view; ``view_weights``
    weights each view's squared distance (single-view: one entry, 1.0).
    """

    anchor_coords: tuple
    anchor_labels: np.ndarray
    k_neighbors: int
    view_weights: np.ndarray

    def __post_init__(self):
        coords = tuple(
            c if isinstance(c, DenseMatrix) else DenseMatrix(matrix_values(c))
            for c in self.anchor_coords
        )
        if not coords:
            raise ValueError("predictor needs at least one view of anchors")
        m = coords[0].rows
        for i, c in enumerate(coords):
            if c.rows != m:
                raise ValueError(f"anchor view {i} has {c.rows} rows, expected {m}")
        labels = np.ascontiguousarray(np.asarray(self.anchor_labels), dtype=np.int64)
        if labels.shape != (m,):
            raise ValueError(f"anchor_labels shape {labels.shape} must be ({m},)")
        if labels.min() < 0:
            raise ValueError("anchor labels must be nonnegative")
        kn = self.k_neighbors
        if int(kn) != kn or kn < 1 or kn > m:
            raise ValueError(f"k_neighbors must be an integer in [1, {m}], got {kn}")
        vw = np.ascontiguousarray(np.asarray(self.view_weights, dtype=np.float64))
        if vw.shape != (len(coords),) or np.any(vw < 0) or not np.all(np.isfinite(vw)):
            raise ValueError("view_weights must be one nonnegative float per view")
        labels.flags.writeable = False
        vw.flags.writeable = False
        object.__setattr__(self, "anchor_coords", coords)
        object.__setattr__(self, "anchor_labels", labels)
        object.__setattr__(self, "k_neighbors", int(kn))
        object.__setattr__(self, "view_weights", vw)

    @property
    def m(self) -> int:
        return self.anchor_coords[0].rows


def build_predictor(model: ClusterModel, k_neighbors: int = 1) -> OosPredictor:
    """Freeze a fitted model's anchors and anchor labels for prediction."""
    return OosPredictor(
        anchor_coords=tuple(a.centers for a in model.anchors),
        anchor_labels=model.anchor_labels,
        k_neighbors=k_neighbors,
        view_weights=model.view_weights,
    )


def _coerce_points(pred: OosPredictor, new_points) -> list[np.ndarray]:
    single = isinstance(new_points, (DenseMatrix, Dataset, np.ndarray))
    if single:
        views = [new_points]
    else:
        views = list(new_points)
    if len(views) != len(pred.anchor_coords):
        raise ValueError(
            f"got {len(views)} point views, predictor has {len(pred.anchor_coords)}"
        )
    out = []
    n = None
    for i, v in enumerate(views):
        arr = matrix_values(v.features if isinstance(v, Dataset) else v)
        if arr.shape[1] != pred.anchor_coords[i].cols:
            raise ValueError(
                f"view {i} has {arr.shape[1]} features, anchors have "
                f"{pred.anchor_coords[i].cols}"
            )
        if n is None:
            n = arr.shape[0]
        elif arr.shape[0] != n:
            raise ValueError("point views must share the sample axis")
        out.append(arr)
    return out


def predict(pred: OosPredictor, new_points) -> np.ndarray:
    """Vote the k nearest anchors for each new point.

    Args:
        pred: frozen predictor.
        new_points: a matrix for single-view predictors, or a sequence of
            per-view matrices (combined distance is the view-weighted sum
            of squared distances).

    Returns:
        (n',) int64 labels.

    Ties: a tied vote goes to the label of the single nearest anchor among
    the tied labels; an exact distance tie there falls back to the smallest
    label id.  Neighbor ranking itself breaks equal distances by anchor
    index, so prediction is deterministic.
    """
    views = _coerce_points(pred, new_points)
    dist = None
    for weight, pts, anch in zip(pred.view_weights, views, pred.anchor_coords):
        part = weight * anchor_sq_dists(pts, anch.data)
        dist = part if dist is None else dist + part
    kn = pred.k_neighbors
    order = np.argsort(dist, axis=1, kind="stable")[:, :kn]
    neighbor_labels = pred.anchor_labels[order]
    if kn == 1:
        return neighbor_labels[:, 0].copy()
    neighbor_dists = np.take_along_axis(dist, order, axis=1)
    n_labels = int(pred.anchor_labels.max()) + 1
    onehot = neighbor_labels[:, :, None] == np.arange(n_labels)[None, None, :]
    counts = onehot.sum(axis=1)
    nearest = np.where(onehot, neighbor_dists[:, :, None], np.inf).min(axis=1)
    label_ids = np.broadcast_to(np.arange(n_labels), counts.shape)
    ranking = np.lexsort((label_ids, nearest, -counts), axis=1)
    return ranking[:, 0].astype(np.int64)
