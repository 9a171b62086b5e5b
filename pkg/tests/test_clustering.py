import numpy as np
import pytest

from mmsampling.clustering import (
    ClusterLabels,
    extend_labels,
    fit_gmm,
    gmm_fit_predict,
    kmeans_fit_predict,
    lloyd,
)
from mmsampling.sampling import SampleSet, SubsetAssignment


def two_clusters_1d(seed=0, n=40):
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.normal(-10, 1, n // 2), rng.normal(10, 1, n // 2)])
    return x[:, None], (x > 0).astype(int)


def same_partition(a, b):
    a, b = np.asarray(a), np.asarray(b)
    pairs = set(zip(a.tolist(), b.tolist()))
    return len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


@pytest.mark.parametrize("seed", range(3))
def test_gmm_separates_threshold_oracle(seed):
    x, truth = two_clusters_1d(seed)
    assert same_partition(gmm_fit_predict(x, 2, restarts=3, seed=seed).labels, truth)


def test_gmm_single_component():
    x, _ = two_clusters_1d()
    out = gmm_fit_predict(x, 1)
    assert out.n_clusters == 1 and np.all(out.labels == 0)


def test_gmm_deterministic():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((60, 3))
    a = gmm_fit_predict(x, 3, restarts=4, seed=9)
    b = gmm_fit_predict(x, 3, restarts=4, seed=9)
    assert np.array_equal(a.labels, b.labels)


def test_gmm_rejects_too_many_components():
    with pytest.raises(ValueError):
        gmm_fit_predict(np.zeros((3, 1)), 4)


def test_gmm_identical_points_warns():
    with pytest.warns(RuntimeWarning, match="identical"):
        out = gmm_fit_predict(np.ones((6, 2)), 2)
    assert np.all(out.labels == 0)


@pytest.mark.parametrize("seed", range(5))
def test_em_log_likelihood_monotone(seed):
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.standard_normal((30, 2)), rng.standard_normal((30, 2)) * 0.3 + 3])
    model, resp = fit_gmm(x, 3, restarts=1, seed=seed)
    trace = np.array(model.trace)
    assert np.all(np.diff(trace) >= -1e-8)
    assert abs(model.weights.sum() - 1) < 1e-10
    assert np.all(np.abs(resp.sum(axis=1) - 1) < 1e-10)
    assert np.all(model.covariances >= 1e-6 * x.var(axis=0).mean())


def test_kmeans_separates_and_is_deterministic():
    x, truth = two_clusters_1d(1)
    a = kmeans_fit_predict(x, 2, seed=5)
    assert same_partition(a.labels, truth)
    assert np.array_equal(a.labels, kmeans_fit_predict(x, 2, seed=5).labels)


def test_kmeans_k_equals_s():
    x = np.arange(7.0)[:, None]
    out = kmeans_fit_predict(x, 7, seed=0)
    assert sorted(out.labels.tolist()) == list(range(7))


def test_lloyd_zero_inertia_at_k_equals_n():
    x = np.random.default_rng(2).standard_normal((10, 2))
    _, labels, inertia = lloyd(x, 10, np.random.default_rng(0))
    assert inertia == 0.0 and len(set(labels.tolist())) == 10


def _samples(assign):
    return SampleSet("mm", SubsetAssignment.from_ids(assign))


def test_extend_direct_lookup():
    out = extend_labels(ClusterLabels([0, 1], 2), _samples([0, 0, 1, 1]))
    assert out.labels.tolist() == [0, 0, 1, 1]


def test_extend_constant():
    out = extend_labels(ClusterLabels([2, 2, 2], 3), _samples([0, 1, 2, 1, 0]))
    assert set(out.labels.tolist()) == {2}


def test_extend_commutes_with_relabeling():
    samples = _samples([0, 1, 2, 2, 1, 0, 3])
    labels = np.array([0, 1, 1, 2])
    perm = np.array([2, 0, 1])
    a = extend_labels(ClusterLabels(labels, 3), samples).labels
    b = extend_labels(ClusterLabels(perm[labels], 3), samples).labels
    assert np.array_equal(perm[a], b)
    assert set(a.tolist()) <= set(labels.tolist())


def test_extend_length_mismatch():
    with pytest.raises(ValueError):
        extend_labels(ClusterLabels([0, 1, 1], 2), _samples([0, 0, 1, 1]))


def test_cluster_labels_range_checked():
    with pytest.raises(ValueError):
        ClusterLabels([0, 3], 2)
