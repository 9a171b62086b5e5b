"""Clustering of embedded samples and extension of their labels to all objects."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp


class DegenerateDataError(ValueError):
    pass


@dataclass(frozen=True)
class ClusterLabels:
    labels: np.ndarray
    n_clusters: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be a vector")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_clusters):
            raise ValueError(f"labels must lie in [0, {self.n_clusters})")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)


@dataclass
class GmmModel:
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    log_likelihood: float
    trace: list[float] = field(default_factory=list)

    @property
    def n_components(self) -> int:
        return len(self.weights)


def _sq_dist(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    out = np.zeros(x.shape[0])
    for d in range(x.shape[1]):
        diff = x[:, d] - c[d]
        out += diff * diff
    return out


def kmeans_plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    closest = _sq_dist(x, centers[0])
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centers[c] = x[idx]
        np.minimum(closest, _sq_dist(x, centers[c]), out=closest)
    return centers


def assign_nearest(x: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of, and squared distance to, the nearest center (ties -> lowest index).

    One center at a time, so extra memory is O(N) regardless of k.
    """
    best = np.full(x.shape[0], np.inf)
    which = np.zeros(x.shape[0], dtype=np.int64)
    for c in range(centers.shape[0]):
        d = _sq_dist(x, centers[c])
        closer = d < best
        best[closer] = d[closer]
        which[closer] = c
    return which, best


def lloyd(
    x: np.ndarray,
    k: int,
    rng: np.random.Generator,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Lloyd's k-means with k-means++ seeding.

    Stops after ``max_iter`` rounds or when inertia changes by less than
    ``tol`` relative.  An empty cluster is re-seeded with the point
    farthest from its current center.  Returns (centers, labels, inertia)
    with labels the nearest final center.
    """
    n = x.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points {n}")
    if k < 1:
        raise ValueError("k must be positive")
    centers = kmeans_plusplus(x, k, rng)
    labels, dist = assign_nearest(x, centers)
    inertia = float(dist.sum())
    for _ in range(max_iter):
        counts = np.bincount(labels, minlength=k)
        for c in np.flatnonzero(counts == 0):
            far = int(np.argmax(dist))
            labels[far] = c
            dist[far] = 0.0
            counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, x)
        centers = sums / counts[:, None]
        labels, dist = assign_nearest(x, centers)
        new_inertia = float(dist.sum())
        change = abs(inertia - new_inertia)
        inertia = new_inertia
        if change <= tol * max(inertia, np.finfo(float).tiny):
            break
    return centers, labels, inertia


def kmeans_fit_predict(coords, k: int, seed: int = 0) -> ClusterLabels:
    x = _coords(coords)
    if k > x.shape[0]:
        raise ValueError(f"k={k} exceeds the number of samples {x.shape[0]}")
    _, labels, _ = lloyd(x, k, np.random.default_rng(seed))
    return ClusterLabels(labels, k)


def _coords(embedding) -> np.ndarray:
    x = getattr(embedding, "coords", embedding)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    return x


def _log_gauss_diag(x, means, variances):
    # (n, K) matrix of log N(x_i | mean_k, diag(var_k))
    d = x.shape[1]
    out = np.empty((x.shape[0], means.shape[0]))
    for c in range(means.shape[0]):
        z = (x - means[c]) ** 2 / variances[c]
        out[:, c] = -0.5 * (z.sum(axis=1) + np.log(variances[c]).sum() + d * np.log(2 * np.pi))
    return out


def _em(x, k, rng, floor, max_iter, tol):
    n = x.shape[0]
    means = kmeans_plusplus(x, k, rng)
    labels, _ = assign_nearest(x, means)
    resp = np.zeros((n, k))
    resp[np.arange(n), labels] = 1.0
    weights, means, variances = _m_step(x, resp, floor)
    trace = []
    prev = -np.inf
    for _ in range(max_iter):
        log_p = _log_gauss_diag(x, means, variances) + np.log(weights)
        norm = logsumexp(log_p, axis=1)
        ll = float(norm.sum())
        trace.append(ll)
        resp = np.exp(log_p - norm[:, None])
        assert np.allclose(resp.sum(axis=1), 1.0, rtol=0, atol=1e-10)
        if np.isfinite(prev) and abs(ll - prev) <= tol * abs(ll):
            break
        prev = ll
        weights, means, variances = _m_step(x, resp, floor)
    return GmmModel(weights, means, variances, trace[-1], trace), resp


def _m_step(x, resp, floor):
    nk = resp.sum(axis=0) + 10 * np.finfo(float).eps
    weights = nk / nk.sum()
    means = resp.T @ x / nk[:, None]
    variances = np.empty_like(means)
    for c in range(means.shape[0]):
        variances[c] = resp[:, c] @ (x - means[c]) ** 2 / nk[c]
    np.maximum(variances, floor, out=variances)
    return weights, means, variances


def fit_gmm(coords, k: int, restarts: int = 10, seed: int = 0, max_iter: int = 200, tol: float = 1e-7):
    """Diagonal-covariance EM; returns (best model, its responsibilities).

    Each restart draws from its own stream spawned from ``seed`` so results
    do not depend on execution order.
    """
    x = _coords(coords)
    n = x.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds the number of samples {n}")
    if k < 1 or restarts < 1:
        raise ValueError("k and restarts must be positive")
    spread = float(x.var(axis=0).mean())
    if spread <= 0:
        raise DegenerateDataError("all points identical")
    floor = 1e-6 * spread
    streams = np.random.SeedSequence(seed).spawn(restarts)
    best = None
    for ss in streams:
        model, resp = _em(x, k, np.random.default_rng(ss), floor, max_iter, tol)
        if best is None or model.log_likelihood > best[0].log_likelihood:
            best = (model, resp)
    return best


def gmm_fit_predict(embedding, k: int, restarts: int = 10, seed: int = 0) -> ClusterLabels:
    x = _coords(embedding)
    if k > x.shape[0]:
        raise ValueError(f"k={k} exceeds the number of samples {x.shape[0]}")
    if k == 1:
        return ClusterLabels(np.zeros(x.shape[0], dtype=np.int64), 1)
    try:
        _, resp = fit_gmm(x, k, restarts=restarts, seed=seed)
    except DegenerateDataError:
        warnings.warn("all embedded points identical; returning a single cluster", RuntimeWarning)
        return ClusterLabels(np.zeros(x.shape[0], dtype=np.int64), k)
    return ClusterLabels(np.argmax(resp, axis=1), k)


def extend_labels(sample_labels: ClusterLabels, samples) -> ClusterLabels:
    """Give every object the label of the sample representing it."""
    dense = samples.assignment.dense
    if len(sample_labels) != samples.s:
        raise ValueError(f"{len(sample_labels)} sample labels for {samples.s} samples")
    return ClusterLabels(sample_labels.labels[dense], sample_labels.n_clusters)
