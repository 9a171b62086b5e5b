"""External clustering scores: adjusted Rand (M1), adjusted mutual information (M2), v-measure (M3)."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True)
class EvalScores:
    m1_rand: float
    m2_mutual_info: float
    m3_v_measure: float

    def as_dict(self) -> dict:
        return asdict(self)

    def as_percent(self) -> dict:
        return {k: round(100.0 * v, 2) for k, v in asdict(self).items()}


def _vector(labels) -> np.ndarray:
    return np.asarray(getattr(labels, "labels", labels))


def contingency(pred, truth) -> np.ndarray:
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((t.max() + 1, p.max() + 1), dtype=np.int64)
    np.add.at(table, (t, p), 1)
    return table


def _comb2(x):
    x = np.asarray(x, dtype=np.int64)
    return x * (x - 1) // 2


def adjusted_rand(table: np.ndarray) -> float:
    n = int(table.sum())
    sum_cells = int(_comb2(table).sum())
    sum_rows = int(_comb2(table.sum(axis=1)).sum())
    sum_cols = int(_comb2(table.sum(axis=0)).sum())
    total = n * (n - 1) // 2
    if total == 0:
        return 1.0
    expected = sum_rows * sum_cols / total
    maximum = (sum_rows + sum_cols) / 2
    if maximum == expected:
        # both partitions trivial in the same way (all-one or all-singleton)
        return 1.0
    return (sum_cells - expected) / (maximum - expected)


def _entropy(counts: np.ndarray) -> float:
    counts = counts[counts > 0].astype(np.float64)
    n = counts.sum()
    return float(-np.sum(counts / n * (np.log(counts) - np.log(n))))


def mutual_info(table: np.ndarray) -> float:
    n = table.sum()
    rows = table.sum(axis=1)
    cols = table.sum(axis=0)
    nz_r, nz_c = np.nonzero(table)
    nij = table[nz_r, nz_c].astype(np.float64)
    mi = nij / n * (np.log(nij) + np.log(n) - np.log(rows[nz_r]) - np.log(cols[nz_c]))
    return max(float(mi.sum()), 0.0)


def expected_mutual_info(table: np.ndarray) -> float:
    """E[MI] for random labelings with the same marginals (hypergeometric model)."""
    n = int(table.sum())
    a = table.sum(axis=1).astype(np.int64)
    b = table.sum(axis=0).astype(np.int64)
    emi = 0.0
    lg_n = gammaln(n + 1)
    for ai in a:
        for bj in b:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1, dtype=np.float64)
            term = nij / n * (np.log(nij) + np.log(n) - np.log(ai) - np.log(bj))
            log_p = (
                gammaln(ai + 1) + gammaln(bj + 1) + gammaln(n - ai + 1) + gammaln(n - bj + 1)
                - lg_n - gammaln(nij + 1) - gammaln(ai - nij + 1) - gammaln(bj - nij + 1)
                - gammaln(n - ai - bj + nij + 1)
            )
            emi += float(np.sum(term * np.exp(log_p)))
    return emi


def adjusted_mutual_info(table: np.ndarray) -> float:
    """AMI normalized by the larger of the two entropies."""
    n_rows = int((table.sum(axis=1) > 0).sum())
    n_cols = int((table.sum(axis=0) > 0).sum())
    if n_rows == n_cols == 1 or n_rows == n_cols == int(table.sum()):
        return 1.0
    mi = mutual_info(table)
    emi = expected_mutual_info(table)
    h = max(_entropy(table.sum(axis=1)), _entropy(table.sum(axis=0)))
    denom = h - emi
    if abs(denom) < np.finfo(float).eps:
        denom = np.finfo(float).eps if denom >= 0 else -np.finfo(float).eps
    return (mi - emi) / denom


def v_measure(table: np.ndarray) -> float:
    h_truth = _entropy(table.sum(axis=1))
    h_pred = _entropy(table.sum(axis=0))
    mi = mutual_info(table)
    homogeneity = 1.0 if h_truth == 0 else mi / h_truth
    completeness = 1.0 if h_pred == 0 else mi / h_pred
    if homogeneity + completeness == 0:
        return 0.0
    return 2 * homogeneity * completeness / (homogeneity + completeness)


def evaluate(pred, truth) -> EvalScores:
    pred, truth = _vector(pred), _vector(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise ValueError("empty labelings")
    table = contingency(pred, truth)
    if (table > 0).sum() == table.shape[0] == table.shape[1]:
        # identical partitions up to renaming
        return EvalScores(1.0, 1.0, 1.0)
    return EvalScores(adjusted_rand(table), adjusted_mutual_info(table), v_measure(table))
