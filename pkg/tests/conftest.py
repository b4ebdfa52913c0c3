"""Shared helpers for the test suite."""

import numpy as np
import pytest

from anchorclust.core import DenseMatrix
from anchorclust.spectral import BipartiteAffinity


def random_affinity(n, m, rng):
    """Random dense row-stochastic affinity."""
    z = rng.uniform(0.05, 1.0, size=(n, m))
    z /= z.sum(axis=1, keepdims=True)
    return BipartiteAffinity(DenseMatrix(z))


def block_affinity(block_sizes, rng, m_per_block=2):
    """Block-diagonal affinity: block p joins its samples to its own anchors only.

    Returns (affinity, sample_block_ids, anchor_block_ids).
    """
    blocks = []
    srows = []
    arows = []
    m_total = m_per_block * len(block_sizes)
    col0 = 0
    rows = []
    for p, sz in enumerate(block_sizes):
        z = rng.uniform(0.1, 1.0, size=(sz, m_per_block))
        z /= z.sum(axis=1, keepdims=True)
        full = np.zeros((sz, m_total))
        full[:, col0:col0 + m_per_block] = z
        rows.append(full)
        srows.extend([p] * sz)
        arows.extend([p] * m_per_block)
        col0 += m_per_block
        blocks.append(z)
    zg = BipartiteAffinity(DenseMatrix(np.vstack(rows)))
    return zg, np.array(srows), np.array(arows)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
