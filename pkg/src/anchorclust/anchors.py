"""K-means anchor selection.

Anchors are cluster centers of a plain Lloyd run with distance-weighted
seeding.  The same routine doubles as the label-extraction step on spectral
embeddings, so it keeps a deterministic tie policy throughout: argmin /
argmax break ties toward the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DenseMatrix, Dataset, matrix_values, spawn_rng, STREAM_ANCHORS


@dataclass(frozen=True, eq=False)
class AnchorSet:
    """Anchor coordinates plus diagnostics from the k-means run."""

    centers: DenseMatrix
    within_cluster_sse: float
    iterations_used: int

    def __post_init__(self):
        if not isinstance(self.centers, DenseMatrix):
            object.__setattr__(self, "centers", DenseMatrix(self.centers))
        if not np.isfinite(self.within_cluster_sse) or self.within_cluster_sse < 0:
            raise ValueError(
                f"within_cluster_sse must be finite and >= 0, got {self.within_cluster_sse}"
            )
        if int(self.iterations_used) != self.iterations_used or self.iterations_used < 0:
            raise ValueError("iterations_used must be a nonnegative integer")

    @property
    def m(self) -> int:
        return self.centers.rows

    @property
    def d(self) -> int:
        return self.centers.cols


@dataclass(frozen=True, eq=False)
class KMeansResult:
    centers: np.ndarray
    assignments: np.ndarray
    sse: float
    sse_trace: np.ndarray
    iterations: int


def _pairwise_sq_dists(points: np.ndarray, refs: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, (n, r).  Clipped at 0 against cancellation."""
    pp = np.einsum("ij,ij->i", points, points)[:, None]
    rr = np.einsum("ij,ij->i", refs, refs)[None, :]
    d2 = pp + rr - 2.0 * (points @ refs.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _seed_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy distance-weighted seeding: draw several candidates per step with
    probability proportional to squared distance from the chosen set, keep the
    one that lowers the total potential most (ties to the first drawn)."""
    n = x.shape[0]
    trials = 2 + int(np.log2(k)) if k > 1 else 1
    idx = np.empty(k, dtype=np.int64)
    idx[0] = rng.integers(n)
    d2 = _pairwise_sq_dists(x, x[idx[0]][None, :])[:, 0]
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            cands = rng.choice(n, size=trials, p=d2 / total)
            pots = [np.minimum(d2, _pairwise_sq_dists(x, x[c][None, :])[:, 0]).sum()
                    for c in cands]
            idx[j] = cands[int(np.argmin(pots))]
        else:
            # remaining points coincide with chosen centers
            unchosen = np.setdiff1d(np.arange(n), idx[:j])
            idx[j] = unchosen[rng.integers(unchosen.size)] if unchosen.size else idx[0]
        d2 = np.minimum(d2, _pairwise_sq_dists(x, x[idx[j]][None, :])[:, 0])
    return x[idx].copy()


def _repair_empty(x, centers, assignments, counts):
    """Re-seed each empty cluster with the point farthest from its own center,
    skipping points that are the sole member of their cluster."""
    dist_own = np.einsum("ij,ij->i", x - centers[assignments], x - centers[assignments])
    for c in np.flatnonzero(counts == 0):
        eligible = counts[assignments] > 1
        if not np.any(eligible):
            break
        cand = np.where(eligible, dist_own, -np.inf)
        pick = int(np.argmax(cand))
        counts[assignments[pick]] -= 1
        assignments[pick] = c
        counts[c] = 1
        centers[c] = x[pick]
        dist_own[pick] = 0.0
    return centers, assignments, counts


def kmeans(data, k: int, seed: int = 0, max_iter: int = 300,
           rng: np.random.Generator | None = None) -> KMeansResult:
    """Lloyd's algorithm with weighted seeding and empty-cluster repair.

    Args:
        data: (n, d) matrix or DenseMatrix of points.
        k: number of centers, 1 <= k <= n.
        seed: seed for the sampling stream (ignored when ``rng`` given).
        max_iter: cap on Lloyd iterations.
        rng: optional generator to draw seeding randomness from.

    Returns:
        KMeansResult with centers (k, d), assignments (n,), final sse,
        per-iteration sse trace, and the iteration count used.

    The SSE trace is nonincreasing; iteration stops when assignments repeat.
    """
    x = matrix_values(data)
    n = x.shape[0]
    if int(k) != k or k < 1 or k > n:
        raise ValueError(f"k must be an integer in [1, {n}], got {k}")
    k = int(k)
    if k > 1 and np.all(x == x[0]):
        raise ValueError("degenerate data: all points identical, cannot split into k > 1 clusters")
    if rng is None:
        rng = np.random.default_rng(seed)
    centers = _seed_centers(x, k, rng)
    assignments = np.zeros(n, dtype=np.int64)
    trace = []
    it = 0
    for it in range(1, max_iter + 1):
        d2 = _pairwise_sq_dists(x, centers)
        new_assign = np.argmin(d2, axis=1)
        counts = np.bincount(new_assign, minlength=k)
        for c in range(k):
            if counts[c] > 0:
                centers[c] = x[new_assign == c].mean(axis=0)
        if np.any(counts == 0):
            centers, new_assign, counts = _repair_empty(x, centers, new_assign, counts)
        sse = float(np.einsum("ij,ij->", x - centers[new_assign], x - centers[new_assign]))
        trace.append(sse)
        if it > 1 and np.array_equal(new_assign, assignments):
            assignments = new_assign
            break
        assignments = new_assign
    return KMeansResult(
        centers=centers,
        assignments=assignments,
        sse=trace[-1],
        sse_trace=np.asarray(trace),
        iterations=it,
    )


ANCHOR_RESTARTS = 5


def select_anchors(data, m: int, seed: int = 0, max_iter: int = 300,
                   rng: np.random.Generator | None = None,
                   restarts: int = ANCHOR_RESTARTS) -> AnchorSet:
    """Pick ``m`` anchors as k-means centers of ``data``.

    Runs ``restarts`` seeded replicates and keeps the lowest-SSE one (ties
    to the earliest), so a single unlucky seeding cannot leave a dense
    region underrepresented.  ``data`` may be a Dataset, DenseMatrix, or
    array.  Requires m <= n.
    """
    if isinstance(data, Dataset):
        x = data.features.data
    else:
        x = matrix_values(data)
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    if m > x.shape[0]:
        raise ValueError(f"m={m} anchors exceed n={x.shape[0]} samples")
    if rng is None:
        rng = spawn_rng(seed, STREAM_ANCHORS)
    best = None
    for _ in range(max(1, restarts)):
        res = kmeans(x, int(m), max_iter=max_iter, rng=rng)
        if best is None or res.sse < best.sse:
            best = res
    return AnchorSet(
        centers=DenseMatrix(best.centers),
        within_cluster_sse=best.sse,
        iterations_used=best.iterations,
    )
