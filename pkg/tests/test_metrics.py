"""ACC / NMI / Purity against brute-force oracles."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anchorclust.metrics import ContingencyTable, accuracy, evaluate, nmi, purity


def brute_force_accuracy(true, pred):
    """Max matched fraction over all injective cluster-to-class maps."""
    tvals = np.unique(true)
    pvals = np.unique(pred)
    small, large = (pvals, tvals) if len(pvals) <= len(tvals) else (tvals, pvals)
    best = 0
    for perm in itertools.permutations(large, len(small)):
        if len(pvals) <= len(tvals):
            match = sum(np.sum((pred == s) & (true == g)) for s, g in zip(small, perm))
        else:
            match = sum(np.sum((true == s) & (pred == g)) for s, g in zip(small, perm))
        best = max(best, match)
    return best / len(true)


class TestAccuracy:
    def test_relabeling_is_perfect(self):
        assert accuracy([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0

    def test_alternating_half(self):
        assert accuracy([0, 0, 1, 1], [0, 1, 0, 1]) == 0.5

    def test_identity(self):
        assert accuracy([0, 1, 2, 0], [0, 1, 2, 0]) == 1.0

    def test_matches_brute_force(self, rng):
        for _ in range(100):
            n = int(rng.integers(4, 25))
            kt = int(rng.integers(2, 5))
            kp = int(rng.integers(2, 5))
            true = rng.integers(0, kt, size=n)
            pred = rng.integers(0, kp, size=n)
            assert accuracy(true, pred) == pytest.approx(brute_force_accuracy(true, pred))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            accuracy([0, 1], [0, 1, 1])


class TestNmi:
    def test_identical_balanced(self):
        assert nmi([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0

    def test_identical_is_exactly_one(self, rng):
        for _ in range(10):
            p = rng.integers(0, 4, size=int(rng.integers(4, 30)))
            if len(np.unique(p)) < 2:
                continue
            assert nmi(p, p) == 1.0

    def test_independent_four_point(self):
        # 2x2 uniform contingency table has zero mutual information
        assert nmi([0, 1, 0, 1], [0, 0, 1, 1]) == 0.0

    def test_relabeled(self):
        assert nmi([0, 0, 1, 1, 2], [2, 2, 0, 0, 1]) == pytest.approx(1.0, abs=1e-12)

    def test_both_trivial_partitions(self):
        assert nmi([0, 0, 0], [5, 5, 5]) == 1.0

    def test_one_trivial_partition(self):
        assert nmi([0, 0, 0, 0], [0, 1, 0, 1]) == 0.0


class TestPurity:
    def test_identity(self):
        assert purity([0, 1, 0, 1], [0, 1, 0, 1]) == 1.0

    def test_single_cluster_balanced(self):
        assert purity([0, 0, 1, 1], [0, 0, 0, 0]) == 0.5

    def test_matches_counting_oracle(self, rng):
        for _ in range(50):
            n = int(rng.integers(4, 30))
            true = rng.integers(0, 4, size=n)
            pred = rng.integers(0, 3, size=n)
            ref = 0
            for c in np.unique(pred):
                members = true[pred == c]
                ref += max(np.sum(members == t) for t in np.unique(members))
            assert purity(true, pred) == pytest.approx(ref / n)


@given(st.lists(st.integers(0, 4), min_size=2, max_size=40))
@settings(max_examples=150, deadline=None)
def test_metric_bounds(labels):
    rng = np.random.default_rng(len(labels))
    true = np.array(labels)
    pred = rng.integers(0, 3, size=len(labels))
    for value in evaluate(true, pred).values():
        assert 0.0 <= value <= 1.0


def test_relabeling_invariance(rng):
    true = rng.integers(0, 3, size=40)
    pred = rng.integers(0, 3, size=40)
    shuffled = (pred + 1) % 3
    assert accuracy(true, pred) == accuracy(true, shuffled)
    assert nmi(true, pred) == pytest.approx(nmi(true, shuffled), abs=1e-12)
    assert purity(true, pred) == purity(true, shuffled)


def test_contingency_table():
    table = ContingencyTable.from_labels([0, 0, 1], [1, 1, 0])
    assert table.n == 3
    assert table.counts.tolist() == [[0, 2], [1, 0]]
    with pytest.raises(ValueError):
        ContingencyTable(counts=np.array([[1, 1]]), n=5)
