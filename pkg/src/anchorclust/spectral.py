"""Spectral machinery over the sample-anchor bipartite graph.

The graph is never materialized.  Row-stochastic affinities Z give sample
degrees of exactly 1 and anchor degrees equal to column sums, so every
spectral quantity reduces to operations on the (n, m) block or its (m, m)
Gram matrix.  The top-k truncated SVD therefore costs O(n m k + m^3)
instead of an eigendecomposition of the (n+m) graph Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DenseMatrix, matrix_values

SIGMA_FLOOR = 1e-10  # below this a left vector is completed, not divided


@dataclass(frozen=True, eq=False)
class BipartiteAffinity:
    """Sample-anchor affinity block Z: entries in [0, 1], rows sum to 1."""

    z: DenseMatrix

    def __post_init__(self):
        if not isinstance(self.z, DenseMatrix):
            object.__setattr__(self, "z", DenseMatrix(self.z))
        zd = self.z.data
        if zd.min() < 0.0 or zd.max() > 1.0:
            raise ValueError("affinity entries must lie in [0, 1]")
        sums = zd.sum(axis=1)
        worst = float(np.abs(sums - 1.0).max())
        if worst > 1e-8:
            raise ValueError(
                f"affinity rows must sum to 1 within 1e-8, worst deviation {worst:.3e}"
            )

    @property
    def n(self) -> int:
        return self.z.rows

    @property
    def m(self) -> int:
        return self.z.cols


@dataclass(frozen=True, eq=False)
class DegreeInfo:
    """Degrees of the bipartite graph; anchor side floored at degree_eps."""

    d_u: np.ndarray
    d_v: np.ndarray

    def __post_init__(self):
        du = np.ascontiguousarray(np.asarray(self.d_u, dtype=np.float64))
        dv = np.ascontiguousarray(np.asarray(self.d_v, dtype=np.float64))
        if du.ndim != 1 or dv.ndim != 1:
            raise ValueError("degree vectors must be 1-dimensional")
        if np.abs(du - 1.0).max() > 1e-8:
            raise ValueError("sample degrees must all equal 1 (row-stochastic affinity)")
        if dv.min() <= 0.0:
            raise ValueError("anchor degrees must be positive after flooring")
        du.flags.writeable = False
        dv.flags.writeable = False
        object.__setattr__(self, "d_u", du)
        object.__setattr__(self, "d_v", dv)


def degrees(zg: BipartiteAffinity, degree_eps: float = 1e-12) -> DegreeInfo:
    """Sample and anchor degrees of Z; anchor degrees floored at degree_eps."""
    zd = zg.z.data
    d_u = zd.sum(axis=1)
    d_v = np.maximum(zd.sum(axis=0), degree_eps)
    return DegreeInfo(d_u=d_u, d_v=d_v)


def scaled_affinity(zg: BipartiteAffinity, deg: DegreeInfo) -> DenseMatrix:
    """Symmetric normalization: zhat_ij = z_ij / sqrt(d_u[i] d_v[j])."""
    zd = zg.z.data
    out = zd / np.sqrt(deg.d_u)[:, None]
    out /= np.sqrt(deg.d_v)[None, :]
    return DenseMatrix(out)


@dataclass(frozen=True, eq=False)
class SpectralEmbedding:
    """Top-k singular blocks of the scaled affinity.

    ``u_block`` (n, k) and ``v_block`` (m, k) stack into an orthonormal
    (n+m, k) frame.  Singular values are descending in [0, 1 + 1e-8].
    """

    u_block: DenseMatrix
    v_block: DenseMatrix
    singular_values: np.ndarray

    def __post_init__(self):
        if not isinstance(self.u_block, DenseMatrix):
            object.__setattr__(self, "u_block", DenseMatrix(self.u_block))
        if not isinstance(self.v_block, DenseMatrix):
            object.__setattr__(self, "v_block", DenseMatrix(self.v_block))
        u = self.u_block.data
        v = self.v_block.data
        if u.shape[1] != v.shape[1]:
            raise ValueError("u_block and v_block must share the column count")
        sv = np.ascontiguousarray(np.asarray(self.singular_values, dtype=np.float64))
        if sv.shape != (u.shape[1],):
            raise ValueError("singular_values must have one entry per embedding column")
        if sv.min() < 0.0 or sv.max() > 1.0 + 1e-8:
            raise ValueError("singular values must lie in [0, 1 + 1e-8]")
        if np.any(np.diff(sv) > 0):
            raise ValueError("singular values must be sorted descending")
        gram = u.T @ u + v.T @ v
        dev = float(np.abs(gram - np.eye(u.shape[1])).max())
        if dev > 1e-8:
            raise ValueError(
                f"stacked embedding columns must be orthonormal within 1e-8, got {dev:.3e}"
            )
        sv.flags.writeable = False
        object.__setattr__(self, "singular_values", sv)

    @property
    def k(self) -> int:
        return self.singular_values.shape[0]

    @property
    def n(self) -> int:
        return self.u_block.rows

    @property
    def m(self) -> int:
        return self.v_block.rows


def _complete_column(q: np.ndarray, col: int) -> np.ndarray:
    """First canonical basis vector with residual > 0.5 against q[:, :col]."""
    n = q.shape[0]
    basis = q[:, :col]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        if col:
            e -= basis @ (basis.T @ e)
        norm = float(np.linalg.norm(e))
        if norm > 0.5:
            return e / norm
    raise ValueError("could not complete an orthonormal basis")


def top_k_embedding(z_hat, k: int) -> SpectralEmbedding:
    """Top-k truncated SVD of the scaled affinity via its anchor Gram matrix.

    Right vectors come from an eigendecomposition of zhat' zhat; left vectors
    from zhat v / sigma, with orthonormal completion for singular values
    below SIGMA_FLOOR.  Each right vector's sign is fixed so its largest-
    magnitude entry is positive, before the left vectors are formed.  A
    re-orthogonalization pass keeps the left block orthonormal even when
    trailing singular values are nearly degenerate.
    """
    zh = matrix_values(z_hat)
    n, m = zh.shape
    if int(k) != k or k < 1 or k > m:
        raise ValueError(f"k must be an integer in [1, {m}], got {k}")
    k = int(k)
    gram = zh.T @ zh
    evals, evecs = np.linalg.eigh(gram)
    order = np.arange(m - 1, m - k - 1, -1)
    sigma = np.sqrt(np.maximum(evals[order], 0.0))
    v = evecs[:, order].copy()
    for j in range(k):
        peak = int(np.argmax(np.abs(v[:, j])))
        if v[peak, j] < 0:
            v[:, j] = -v[:, j]
    u = np.zeros((n, k))
    healthy = sigma >= SIGMA_FLOOR
    if np.any(healthy):
        u[:, healthy] = (zh @ v[:, healthy]) / sigma[healthy]
    for j in range(k):
        if healthy[j]:
            # re-orthogonalize (twice, for stability) against earlier columns
            col = u[:, j].copy()
            for _ in range(2):
                if j:
                    col -= u[:, :j] @ (u[:, :j].T @ col)
            norm = float(np.linalg.norm(col))
            if norm > 1e-6:
                u[:, j] = col / norm
                continue
        u[:, j] = _complete_column(u, j)
    half = np.sqrt(2.0) / 2.0
    return SpectralEmbedding(
        u_block=DenseMatrix(half * u),
        v_block=DenseMatrix(half * v),
        singular_values=sigma,
    )


def pairwise_w(emb: SpectralEmbedding, deg: DegreeInfo) -> np.ndarray:
    """Connectivity weights W_ij = || U_i / sqrt(d_u_i) - V_j / sqrt(d_v_j) ||^2.

    Computed by norm expansion; matches the naive double loop to roundoff.
    """
    p = emb.u_block.data / np.sqrt(deg.d_u)[:, None]
    q = emb.v_block.data / np.sqrt(deg.d_v)[:, None]
    pp = np.einsum("ij,ij->i", p, p)[:, None]
    qq = np.einsum("ij,ij->i", q, q)[None, :]
    w = pp + qq - 2.0 * (p @ q.T)
    np.maximum(w, 0.0, out=w)
    return w


def trace_objective(emb: SpectralEmbedding, z_hat) -> float:
    """Tr(u_block' zhat v_block); maximized at half the top-k singular sum."""
    zh = matrix_values(z_hat)
    return float(np.einsum("ik,ik->", emb.u_block.data, zh @ emb.v_block.data))


def component_count(zg: BipartiteAffinity, tol: float = 1e-6,
                    degree_eps: float = 1e-12) -> int:
    """Number of connected components of the bipartite graph.

    Counts singular values of the scaled affinity within ``tol`` of 1; each
    unit singular value corresponds to one connected component.
    """
    if not 0 < tol < 1:
        raise ValueError(f"tol must be in (0, 1), got {tol}")
    deg = degrees(zg, degree_eps)
    zh = matrix_values(scaled_affinity(zg, deg))
    evals = np.linalg.eigvalsh(zh.T @ zh)
    sigma = np.sqrt(np.maximum(evals, 0.0))
    return int(np.count_nonzero(sigma >= 1.0 - tol))
