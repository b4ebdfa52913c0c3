"""Batched quadratic programs on the probability simplex.

Each affinity row solves  min_z  z' H z + f' z  s.t.  z >= 0, sum(z) = 1.
All rows of one update share the same Hessian, so the batch solver runs a
single accelerated projected-gradient scheme on the whole (n, m) block.
The scheme is monotone: a candidate step is only accepted for a row when it
does not increase that row's objective, which the alternating outer loop
relies on.  Momentum restarts per row on rejection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DenseMatrix, matrix_values

DEFAULT_QP_TOL = 1e-8
MAX_INNER = 100_000
_CHECK_EVERY = 8


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex, along the last axis.

    Exact sort-based algorithm.  Output is nonnegative and sums to 1 up to
    floating-point roundoff.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] < 1:
        raise ValueError("cannot project an empty vector")
    u = np.flip(np.sort(v, axis=-1), axis=-1)
    css = np.cumsum(u, axis=-1)
    j = np.arange(1, v.shape[-1] + 1, dtype=np.float64)
    cond = u + (1.0 - css) / j > 0.0
    rho = np.count_nonzero(cond, axis=-1)
    css_rho = np.take_along_axis(css, rho[..., None] - 1, axis=-1)[..., 0]
    tau = (css_rho - 1.0) / rho
    return np.maximum(v - tau[..., None], 0.0)


@dataclass(frozen=True, eq=False)
class SimplexQP:
    """One row subproblem: Hessian (m, m) and linear term (m,).

    The Hessian must be symmetric and positive (semi)definite; construction
    rejects indefinite matrices.
    """

    hessian: DenseMatrix
    linear: np.ndarray

    def __post_init__(self):
        if not isinstance(self.hessian, DenseMatrix):
            object.__setattr__(self, "hessian", DenseMatrix(self.hessian))
        h = self.hessian.data
        if h.shape[0] != h.shape[1]:
            raise ValueError(f"hessian must be square, got shape {h.shape}")
        scale = max(1.0, float(np.abs(h).max()))
        if float(np.abs(h - h.T).max()) > 1e-10 * scale:
            raise ValueError("hessian is not symmetric within 1e-10")
        jitter = 1e-10 * max(1.0, float(np.trace(h)) / h.shape[0])
        try:
            np.linalg.cholesky(h + jitter * np.eye(h.shape[0]))
        except np.linalg.LinAlgError:
            raise ValueError("hessian not positive definite") from None
        f = np.ascontiguousarray(np.asarray(self.linear, dtype=np.float64))
        if f.shape != (h.shape[0],):
            raise ValueError(
                f"linear term shape {f.shape} does not match hessian size {h.shape[0]}"
            )
        if not np.all(np.isfinite(f)):
            raise ValueError("linear term contains non-finite entries")
        f.flags.writeable = False
        object.__setattr__(self, "linear", f)

    @property
    def m(self) -> int:
        return self.hessian.rows


def _objective_rows(z, h, f):
    return np.einsum("ij,ij->i", z @ h, z) + np.einsum("ij,ij->i", f, z)


def _gradient_rows(z, h, f):
    return 2.0 * (z @ h) + f


def _residual_rows(z, h, f):
    r = z - project_simplex(z - _gradient_rows(z, h, f))
    return np.sqrt(np.einsum("ij,ij->i", r, r))


def kkt_residual(qp: SimplexQP, z: np.ndarray) -> float:
    """Projected-gradient fixed-point residual ||z - P(z - g(z))|| at unit step."""
    z = np.asarray(z, dtype=np.float64).reshape(1, -1)
    if z.shape[1] != qp.m:
        raise ValueError(f"z has {z.shape[1]} entries, expected {qp.m}")
    return float(_residual_rows(z, qp.hessian.data, qp.linear[None, :])[0])


def solve_rows(hessian, linear_terms: np.ndarray, z0: np.ndarray | None = None,
               qp_tol: float = DEFAULT_QP_TOL, max_inner: int = MAX_INNER) -> np.ndarray:
    """Solve every row's simplex QP against one shared Hessian.

    Args:
        hessian: (m, m) symmetric PSD matrix shared by all rows.
        linear_terms: (n, m) per-row linear coefficients.
        z0: optional warm start, rows on the simplex (defaults to uniform).
        qp_tol: target KKT residual per row.
        max_inner: iteration cap; exceeding it raises RuntimeError.

    Returns:
        (n, m) solution block.  A warm start that already meets ``qp_tol``
        for every row is returned unchanged, bit for bit.
    """
    h = matrix_values(hessian)
    f = np.asarray(linear_terms, dtype=np.float64)
    if f.ndim != 2 or f.shape[1] != h.shape[0]:
        raise ValueError(
            f"linear_terms shape {f.shape} incompatible with hessian size {h.shape[0]}"
        )
    n, m = f.shape
    if z0 is None:
        z = np.full((n, m), 1.0 / m)
    else:
        z = np.array(z0, dtype=np.float64)
        if z.shape != (n, m):
            raise ValueError(f"z0 shape {z.shape} does not match ({n}, {m})")
        if np.any(z < 0) or np.any(np.abs(z.sum(axis=1) - 1.0) > 1e-8):
            raise ValueError("z0 rows must lie on the probability simplex")

    evals = np.linalg.eigvalsh(h)
    if evals[0] < -1e-8 * max(1.0, abs(evals[-1])):
        raise ValueError("hessian not positive definite")
    step = 1.0 / max(2.0 * evals[-1], 1e-12)

    y = z.copy()
    tmom = np.ones(n)
    took_step = False
    converged = False
    for inner in range(max_inner):
        if inner % _CHECK_EVERY == 0:
            if _residual_rows(z, h, f).max() <= qp_tol:
                converged = True
                break
        cand = project_simplex(y - step * _gradient_rows(y, h, f))
        # adaptive restart: kill momentum on rows where it points against
        # the descent direction just taken
        restart = np.einsum("ij,ij->i", y - cand, cand - z) > 0.0
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tmom * tmom))
        y = cand + ((tmom - 1.0) / t_new)[:, None] * (cand - z)
        if np.any(restart):
            t_new[restart] = 1.0
            y[restart] = cand[restart]
        z, tmom = cand, t_new
        took_step = True
    if not converged and _residual_rows(z, h, f).max() > qp_tol:
        raise RuntimeError(
            f"simplex QP failed to reach KKT residual {qp_tol} within {max_inner} iterations"
        )
    if not took_step:
        return z
    z = project_simplex(z)
    np.maximum(z, 0.0, out=z)
    z /= z.sum(axis=1, keepdims=True)
    return z


def solve(qp: SimplexQP, qp_tol: float = DEFAULT_QP_TOL,
          z0: np.ndarray | None = None, max_inner: int = MAX_INNER) -> np.ndarray:
    """Solve one simplex QP to the requested KKT residual.

    Returns the (m,) solution.  See ``solve_rows`` for semantics.
    """
    z0r = None if z0 is None else np.asarray(z0, dtype=np.float64).reshape(1, -1)
    out = solve_rows(qp.hessian.data, qp.linear[None, :], z0=z0r,
                     qp_tol=qp_tol, max_inner=max_inner)
    return out[0]
