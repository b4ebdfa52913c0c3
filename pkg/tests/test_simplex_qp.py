"""Simplex-constrained QP solver against exact small-instance oracles."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anchorclust.core import DenseMatrix
from anchorclust.simplex_qp import (
    SimplexQP,
    kkt_residual,
    project_simplex,
    solve,
    solve_rows,
)


def exact_simplex_qp(h, f):
    """Exact minimizer of z'Hz + f'z on the simplex via support enumeration.

    For each nonempty support S the equality-constrained stationary point
    solves the KKT system; the best feasible candidate over all supports is
    the global optimum (H PSD).  Only practical for small m.
    """
    m = len(f)
    best_val = np.inf
    best_z = None
    for r in range(1, m + 1):
        for sup in itertools.combinations(range(m), r):
            idx = list(sup)
            hs = h[np.ix_(idx, idx)]
            # stationarity 2Hz + f = nu * 1 on the support, plus sum(z) = 1
            kkt = np.zeros((r + 1, r + 1))
            kkt[:r, :r] = 2.0 * hs
            kkt[:r, r] = -1.0
            kkt[r, :r] = 1.0
            rhs = np.concatenate([-f[idx], [1.0]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            zs = sol[:r]
            if np.any(zs < -1e-12):
                continue
            z = np.zeros(m)
            z[idx] = np.maximum(zs, 0.0)
            val = z @ h @ z + f @ z
            if val < best_val:
                best_val = val
                best_z = z
    return best_z, best_val


def qp_value(h, f, z):
    return float(z @ h @ z + f @ z)


def test_identity_hessian_uniform():
    qp = SimplexQP(DenseMatrix(np.eye(3)), np.zeros(3))
    assert np.allclose(solve(qp), np.full(3, 1.0 / 3.0), atol=1e-10)


def test_single_coordinate():
    qp = SimplexQP(DenseMatrix(np.array([[4.2]])), np.array([-1.0]))
    assert np.array_equal(solve(qp), np.array([1.0]))


def test_diag_one_two():
    h = np.diag([1.0, 2.0])
    qp = SimplexQP(DenseMatrix(h), np.zeros(2))
    z = solve(qp)
    assert np.allclose(z, [2.0 / 3.0, 1.0 / 3.0], atol=1e-8)
    # grid cross-check at step 1e-4
    grid = np.arange(0.0, 1.0 + 1e-9, 1e-4)
    vals = grid**2 + 2.0 * (1.0 - grid) ** 2
    z1 = grid[np.argmin(vals)]
    assert abs(z[0] - z1) < 2e-4


def test_random_instances_match_enumeration_oracle(rng):
    for _ in range(50):
        m = int(rng.integers(2, 5))
        b = rng.standard_normal((m, m))
        h = b @ b.T + np.diag(rng.uniform(0.1, 2.0, m))
        f = rng.standard_normal(m) * rng.uniform(0.5, 5.0)
        qp = SimplexQP(DenseMatrix(h), f)
        z = solve(qp)
        _, best_val = exact_simplex_qp(h, f)
        assert qp_value(h, f, z) <= best_val + 1e-6
        assert kkt_residual(qp, z) <= 1e-8


def test_solution_feasible(rng):
    for _ in range(20):
        m = int(rng.integers(2, 8))
        b = rng.standard_normal((m, m))
        h = b @ b.T + 0.1 * np.eye(m)
        f = rng.standard_normal(m) * 3.0
        z = solve(SimplexQP(DenseMatrix(h), f))
        assert np.all(z >= 0.0)
        assert abs(z.sum() - 1.0) <= 1e-12


def test_never_worse_than_uniform(rng):
    for _ in range(25):
        m = int(rng.integers(2, 7))
        b = rng.standard_normal((m, m))
        h = b @ b.T + 0.05 * np.eye(m)
        f = rng.standard_normal(m)
        z = solve(SimplexQP(DenseMatrix(h), f))
        u = np.full(m, 1.0 / m)
        assert qp_value(h, f, z) <= qp_value(h, f, u) + 1e-12


def test_non_pd_hessian_rejected():
    with pytest.raises(ValueError, match="hessian not positive definite"):
        SimplexQP(DenseMatrix(np.diag([1.0, -1.0])), np.zeros(2))


def test_asymmetric_hessian_rejected():
    with pytest.raises(ValueError, match="symmetric"):
        SimplexQP(DenseMatrix(np.array([[1.0, 0.5], [0.0, 1.0]])), np.zeros(2))


def test_duplicate_anchor_psd_still_solves(rng):
    # alpha = 0 with a repeated anchor gives a singular PSD Hessian; the
    # solver must still return a KKT point (optimum is non-unique)
    a = rng.standard_normal((3, 2))
    a[2] = a[0]
    h = a @ a.T
    f = rng.standard_normal(3)
    qp = SimplexQP(DenseMatrix(h), f)
    z = solve(qp)
    assert kkt_residual(qp, z) <= 1e-8


def test_solve_rows_matches_scalar_solve(rng):
    m = 5
    b = rng.standard_normal((m, m))
    h = b @ b.T + 0.2 * np.eye(m)
    fs = rng.standard_normal((12, m))
    batch = solve_rows(h, fs)
    for i in range(12):
        zi = solve(SimplexQP(DenseMatrix(h), fs[i]))
        assert qp_value(h, fs[i], batch[i]) == pytest.approx(qp_value(h, fs[i], zi), abs=1e-8)


def test_warm_start_fixed_point(rng):
    m = 4
    b = rng.standard_normal((m, m))
    h = b @ b.T + 0.3 * np.eye(m)
    f = rng.standard_normal((6, m))
    z1 = solve_rows(h, f)
    z2 = solve_rows(h, f, z0=z1)
    # restarting from a converged block returns it unchanged
    assert np.array_equal(z1, z2)


class TestProjectSimplex:
    def test_on_simplex_unchanged(self):
        v = np.array([0.2, 0.5, 0.3])
        assert np.allclose(project_simplex(v), v, atol=1e-15)

    def test_vertex(self):
        assert np.allclose(project_simplex(np.array([2.0, 0.0])), [1.0, 0.0])

    def test_negative_coordinate_clipped(self):
        got = project_simplex(np.array([0.6, 0.4, -1.0]))
        assert np.allclose(got, [0.6, 0.4, 0.0], atol=1e-12)
        # projection optimality: <v - p, q - p> <= 0 for feasible q
        v = np.array([0.6, 0.4, -1.0])
        p = got
        for q in (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0]),
                  np.full(3, 1 / 3)):
            assert np.dot(v - p, q - p) <= 1e-10

    def test_idempotent(self, rng):
        for _ in range(20):
            v = rng.standard_normal(6) * 4
            p = project_simplex(v)
            assert np.allclose(project_simplex(p), p, atol=1e-12)
            assert abs(p.sum() - 1.0) < 1e-12 and np.all(p >= 0)

    @given(
        st.lists(st.floats(-50, 50), min_size=2, max_size=8),
        st.lists(st.floats(-50, 50), min_size=2, max_size=8),
    )
    @settings(max_examples=200, deadline=None)
    def test_one_lipschitz(self, a, b):
        k = min(len(a), len(b))
        va, vb = np.array(a[:k]), np.array(b[:k])
        pa, pb = project_simplex(va), project_simplex(vb)
        assert np.linalg.norm(pa - pb) <= np.linalg.norm(va - vb) + 1e-9
