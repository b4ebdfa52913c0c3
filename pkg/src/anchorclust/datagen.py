"""Synthetic datasets for tests, benchmarks, and examples."""

from __future__ import annotations

import numpy as np

from .core import Dataset, DenseMatrix


def gaussian_blobs(n: int, d: int, k: int, separation: float = 10.0,
                   cluster_std: float = 1.0, seed: int = 0) -> Dataset:
    """Isotropic Gaussian clusters with a controlled center separation.

    Centers are drawn at random, then rescaled so the minimum pairwise
    center distance equals ``separation * cluster_std``.  Sample counts per
    cluster differ by at most one.
    """
    if k < 1 or n < k or d < 1:
        raise ValueError(f"need n >= k >= 1 and d >= 1, got n={n}, d={d}, k={k}")
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((k, d))
    if k > 1:
        diff = centers[:, None, :] - centers[None, :, :]
        dists = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        min_dist = dists[np.triu_indices(k, 1)].min()
        if min_dist <= 0:
            raise ValueError("degenerate random centers; use another seed")
        centers *= separation * cluster_std / min_dist
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    labels = np.repeat(np.arange(k), sizes)
    points = centers[labels] + cluster_std * rng.standard_normal((n, d))
    return Dataset(features=DenseMatrix(points), labels=labels)


def union_of_subspaces(n: int, d: int, k: int, sub_dim: int = 1,
                       noise: float = 0.01, seed: int = 0) -> Dataset:
    """Points near k random low-dimensional linear subspaces.

    Each cluster lives on its own ``sub_dim``-dimensional subspace through
    the origin, with isotropic ambient noise added.
    """
    if not (1 <= sub_dim < d):
        raise ValueError(f"need 1 <= sub_dim < d, got sub_dim={sub_dim}, d={d}")
    if k < 1 or n < k:
        raise ValueError(f"need n >= k >= 1, got n={n}, k={k}")
    rng = np.random.default_rng(seed)
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    labels = np.repeat(np.arange(k), sizes)
    points = np.empty((n, d))
    start = 0
    for c in range(k):
        basis = np.linalg.qr(rng.standard_normal((d, sub_dim)))[0]
        coeff = rng.standard_normal((sizes[c], sub_dim))
        points[start:start + sizes[c]] = coeff @ basis.T
        start += sizes[c]
    points += noise * rng.standard_normal((n, d))
    return Dataset(features=DenseMatrix(points), labels=labels)


def random_noise(n: int, d: int, scale: float = 1.0, seed: int = 0) -> Dataset:
    """Structure-free Gaussian noise, useful as a corrupted view."""
    rng = np.random.default_rng(seed)
    return Dataset(features=DenseMatrix(scale * rng.standard_normal((n, d))))
