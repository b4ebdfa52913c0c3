"""External clustering metrics: accuracy, NMI, purity.

All three start from the contingency table of (true, predicted) labels.
Label values are arbitrary integers; they are re-indexed internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """counts[i, j] = #samples with true class i and predicted cluster j."""

    counts: np.ndarray
    n: int

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.counts, dtype=np.int64))
        if c.ndim != 2 or np.any(c < 0):
            raise ValueError("counts must be a 2-D nonnegative integer table")
        if int(c.sum()) != self.n:
            raise ValueError(f"counts sum {int(c.sum())} != n {self.n}")
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_labels(cls, true_labels, pred_labels) -> "ContingencyTable":
        t, p = _check_label_pair(true_labels, pred_labels)
        _, ti = np.unique(t, return_inverse=True)
        _, pi = np.unique(p, return_inverse=True)
        kt = int(ti.max()) + 1
        kp = int(pi.max()) + 1
        counts = np.bincount(ti * kp + pi, minlength=kt * kp).reshape(kt, kp)
        return cls(counts=counts, n=t.shape[0])


def _check_label_pair(true_labels, pred_labels):
    t = np.asarray(true_labels)
    p = np.asarray(pred_labels)
    if t.ndim != 1 or p.ndim != 1:
        raise ValueError("label vectors must be 1-dimensional")
    if t.shape[0] != p.shape[0]:
        raise ValueError(f"label lengths differ: {t.shape[0]} vs {p.shape[0]}")
    if t.shape[0] == 0:
        raise ValueError("label vectors must be non-empty")
    for name, arr in (("true", t), ("pred", p)):
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.round(arr)):
                raise ValueError(f"{name} labels must be integers")
    return t.astype(np.int64), p.astype(np.int64)


def accuracy(true_labels, pred_labels) -> float:
    """Clustering accuracy under the best one-to-one cluster-class matching.

    The matching maximizes the matched count over the contingency table
    (rectangular tables allowed), so the result is the exact optimum.
    """
    table = ContingencyTable.from_labels(true_labels, pred_labels)
    row, col = linear_sum_assignment(table.counts, maximize=True)
    return float(table.counts[row, col].sum()) / table.n


def nmi(true_labels, pred_labels) -> float:
    """Normalized mutual information, I(T;P) / sqrt(H(T) H(P)), natural log.

    Both partitions trivial (single cluster each): defined as 1.0.
    Exactly one trivial partition: 0.0.
    """
    table = ContingencyTable.from_labels(true_labels, pred_labels)
    counts = table.counts.astype(np.float64)
    n = float(table.n)
    pt = counts.sum(axis=1) / n
    pp = counts.sum(axis=0) / n
    log_pt = np.log(pt, where=pt > 0, out=np.zeros_like(pt))
    log_pp = np.log(pp, where=pp > 0, out=np.zeros_like(pp))
    ht = -float(np.sum(pt * log_pt))
    hp = -float(np.sum(pp * log_pp))
    if ht <= 0.0 and hp <= 0.0:
        return 1.0
    if ht <= 0.0 or hp <= 0.0:
        return 0.0
    pij = counts / n
    mask = pij > 0
    log_pij = np.log(pij, where=mask, out=np.zeros_like(pij))
    # shared log terms keep mi bitwise equal to the entropies when the
    # partitions coincide, so the ratio below is exactly 1 there
    mi = float(np.sum(pij[mask] * (log_pij - log_pt[:, None] - log_pp[None, :])[mask]))
    value = np.sqrt((mi * mi) / (ht * hp))
    return float(min(max(value, 0.0), 1.0))


def purity(true_labels, pred_labels) -> float:
    """Fraction of samples matching the majority true class of their cluster."""
    table = ContingencyTable.from_labels(true_labels, pred_labels)
    return float(table.counts.max(axis=0).sum()) / table.n


def evaluate(true_labels, pred_labels) -> dict:
    """All three metrics in one dict: acc, nmi, purity."""
    return {
        "acc": accuracy(true_labels, pred_labels),
        "nmi": nmi(true_labels, pred_labels),
        "purity": purity(true_labels, pred_labels),
    }
