"""Core types: construction guards, config validation, round trips."""

import numpy as np
import pytest

from anchorclust.core import (
    Dataset,
    DenseMatrix,
    SolverConfig,
    ViewCollection,
    spawn_rng,
    validate_config,
)
from anchorclust.datagen import gaussian_blobs
from anchorclust.spectral import BipartiteAffinity, SpectralEmbedding


class TestDenseMatrix:
    def test_basic_shape(self):
        m = DenseMatrix(np.arange(6.0).reshape(2, 3))
        assert m.rows == 2 and m.cols == 3
        assert m.data.shape == (2, 3)

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            DenseMatrix(np.array([[0.0, np.nan]]))

    def test_inf_rejected(self):
        with pytest.raises(ValueError):
            DenseMatrix(np.array([[np.inf, 1.0]]))

    def test_non_2d_rejected(self):
        with pytest.raises(ValueError):
            DenseMatrix(np.zeros(3))

    def test_immutable(self):
        m = DenseMatrix(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            m.data[0, 0] = 1.0


class TestDataset:
    def test_labels_length_checked(self):
        with pytest.raises(ValueError):
            Dataset(DenseMatrix(np.zeros((3, 2))), labels=np.array([0, 1]))

    def test_minimum_rows(self):
        with pytest.raises(ValueError):
            Dataset(DenseMatrix(np.zeros((1, 2))))

    def test_plain_array_accepted(self):
        ds = Dataset(np.zeros((4, 2)))
        assert ds.n == 4 and ds.d == 2


class TestViewCollection:
    def test_needs_two_views(self):
        with pytest.raises(ValueError):
            ViewCollection(views=(np.zeros((3, 2)),))

    def test_view_length_mismatch(self):
        with pytest.raises(ValueError, match="view length mismatch"):
            ViewCollection(views=(np.zeros((3, 2)), np.zeros((4, 2))))

    def test_differing_feature_dims_fine(self):
        vc = ViewCollection(views=(np.zeros((3, 2)), np.zeros((3, 5))))
        assert vc.view_count == 2 and vc.n == 3


class TestSolverConfig:
    def test_defaults(self):
        cfg = SolverConfig(k=2, m=4)
        assert cfg.tol == 1e-6
        assert cfg.max_iter == 50
        assert cfg.qp_tol == 1e-8
        assert cfg.degree_eps == 1e-12

    def test_m_below_k(self):
        # k=2, m=1 must be refused up front
        with pytest.raises(ValueError, match="m must be ≥ k"):
            SolverConfig(k=2, m=1)

    def test_gamma_zero(self):
        with pytest.raises(ValueError, match="gamma must be negative"):
            SolverConfig(k=2, m=4, gamma=0.0)

    def test_valid_config_passes(self):
        data = gaussian_blobs(400, 3, 3, seed=0)
        validate_config(SolverConfig(k=3, m=10), data)

    def test_m_exceeding_n(self):
        data = gaussian_blobs(8, 2, 2, seed=0)
        with pytest.raises(ValueError, match="m"):
            validate_config(SolverConfig(k=2, m=9), data)

    def test_dict_round_trip(self):
        cfg = SolverConfig(k=3, m=7, alpha=0.5, beta=2.0, gamma=-2.0, seed=11)
        assert SolverConfig.from_dict(cfg.to_dict()) == cfg

    def test_negative_alpha(self):
        with pytest.raises(ValueError):
            SolverConfig(k=2, m=4, alpha=-1.0)


class TestAffinityAndEmbedding:
    def test_rows_must_be_stochastic(self):
        with pytest.raises(ValueError):
            BipartiteAffinity(DenseMatrix(np.array([[0.5, 0.4], [0.5, 0.5]])))

    def test_entries_within_unit_interval(self):
        with pytest.raises(ValueError):
            BipartiteAffinity(DenseMatrix(np.array([[1.5, -0.5]])))

    def test_embedding_orthonormality_enforced(self):
        u = DenseMatrix(np.ones((3, 2)))
        v = DenseMatrix(np.ones((2, 2)))
        with pytest.raises(ValueError):
            SpectralEmbedding(u_block=u, v_block=v, singular_values=np.array([1.0, 1.0]))


def test_spawn_rng_deterministic():
    a = spawn_rng(7, 1, 3).standard_normal(5)
    b = spawn_rng(7, 1, 3).standard_normal(5)
    c = spawn_rng(7, 1, 4).standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
