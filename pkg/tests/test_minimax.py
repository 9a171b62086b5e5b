import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.csgraph import minimum_spanning_tree

from mmsampling.data import DataMatrix, dissimilarity_matrix, generate_synthetic
from mmsampling.memory import MemoryTracker
from mmsampling.minimax import (
    CapExceededError,
    MstEdgeList,
    SpanningTreeError,
    minimax_from_mst,
    minimax_oracle,
    prim_incremental,
)

from oracles import dense_prim_weight, path_minimax, spanning_tree_weights, ultrametric_violations

# squared distances 1 (0-1), 10 (0-2), 5 (1-2)
TRIANGLE = DataMatrix(np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 1.0]]))


def test_triangle_fixture_has_stated_dissimilarities():
    w = dissimilarity_matrix(TRIANGLE.values)
    assert (w[0, 1], w[0, 2], w[1, 2]) == (1.0, 10.0, 5.0)


def test_prim_two_points():
    mst = prim_incremental(DataMatrix(np.array([[0.0], [3.0]])))
    assert mst.weights.tolist() == [9.0]
    assert {mst.u[0], mst.v[0]} == {0, 1}


@pytest.mark.parametrize("seed", range(3))
def test_prim_triangle_matches_enumeration(seed):
    w = dissimilarity_matrix(TRIANGLE.values)
    trees = spanning_tree_weights(w)
    assert sorted(trees) == [6.0, 11.0, 15.0]
    mst = prim_incremental(TRIANGLE, seed=seed)
    assert sorted(mst.weights.tolist()) == [1.0, 5.0]
    assert mst.total_weight == min(trees)


def test_prim_matches_dense_prim_and_scipy():
    rng = np.random.default_rng(5)
    d = DataMatrix(rng.standard_normal((50, 3)))
    w = dissimilarity_matrix(d.values)
    mst = prim_incremental(d, seed=1)
    mst.validate()
    assert abs(mst.total_weight - dense_prim_weight(w)) <= 1e-9
    assert abs(mst.total_weight - minimum_spanning_tree(w).sum()) <= 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_prim_weight_independent_of_start(seed):
    # integer grid has many ties
    rng = np.random.default_rng(0)
    d = DataMatrix(rng.integers(0, 4, size=(40, 2)).astype(float))
    ref = prim_incremental(d, seed=0).total_weight
    assert prim_incremental(d, seed=seed).total_weight == ref


def test_prim_endpoints_carry_their_weight():
    rng = np.random.default_rng(9)
    d = DataMatrix(rng.standard_normal((30, 2)))
    w = dissimilarity_matrix(d.values)
    mst = prim_incremental(d, seed=4)
    assert np.array_equal(w[mst.u, mst.v], mst.weights)


def test_prim_rejects_single_object():
    with pytest.raises(ValueError):
        prim_incremental(DataMatrix(np.zeros((1, 2))))


def test_prim_aux_memory_is_linear():
    ratios = []
    for n in (1000, 4000, 16000):
        d = generate_synthetic("two_blobs", n, seed=1)
        tracker = MemoryTracker(n, forbid_quadratic=True)
        prim_incremental(d, seed=0, tracker=tracker)
        ratios.append(tracker.peak / n)
    assert max(ratios) / min(ratios) < 1.10
    assert max(ratios) <= 6


def test_oracle_triangle_and_paths():
    m = minimax_oracle(TRIANGLE)
    assert m[0, 2] == 5.0
    np.testing.assert_array_equal(m, path_minimax(dissimilarity_matrix(TRIANGLE.values)))


def test_oracle_two_points():
    d = DataMatrix(np.array([[0.0, 0.0], [1.0, 2.0]]))
    assert minimax_oracle(d)[0, 1] == 5.0


@pytest.mark.parametrize("seed", range(4))
def test_oracle_matches_path_enumeration(seed):
    d = DataMatrix(np.random.default_rng(seed).standard_normal((6, 2)))
    np.testing.assert_array_equal(minimax_oracle(d), path_minimax(dissimilarity_matrix(d.values)))


def test_oracle_cap():
    with pytest.raises(CapExceededError):
        minimax_oracle(DataMatrix(np.zeros((11, 1))), cap=10)


def test_minimax_from_mst_path_graph():
    mst = MstEdgeList(np.array([1.0, 5.0]), np.array([0, 1]), np.array([1, 2]), 3)
    m = minimax_from_mst(mst)
    assert m[0, 2] == 5.0 and m[0, 1] == 1.0 and m[1, 2] == 5.0


def test_minimax_from_mst_constant_weights():
    n = 7
    mst = MstEdgeList(np.full(n - 1, 2.5), np.zeros(n - 1, dtype=int), np.arange(1, n), n)
    m = minimax_from_mst(mst)
    assert np.all(m[~np.eye(n, dtype=bool)] == 2.5)
    assert np.all(np.diag(m) == 0)


def test_minimax_from_mst_equals_oracle_100_points():
    d = DataMatrix(np.random.default_rng(21).uniform(size=(100, 2)))
    np.testing.assert_array_equal(minimax_from_mst(prim_incremental(d, seed=3)), minimax_oracle(d))


def test_minimax_from_mst_rejects_non_spanning():
    cycle = MstEdgeList(np.ones(3), np.array([0, 1, 0]), np.array([1, 0, 2]), 4)
    with pytest.raises(SpanningTreeError):
        minimax_from_mst(cycle)
    short = MstEdgeList(np.ones(2), np.array([0, 1]), np.array([1, 2]), 4)
    with pytest.raises(SpanningTreeError):
        minimax_from_mst(short)


def test_duplicate_points_give_zero_edges():
    x = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    d = DataMatrix(x)
    m = minimax_from_mst(prim_incremental(d))
    assert m[0, 1] == 0.0 and m[2, 3] == 0.0 and m[0, 3] == 1.0
    np.testing.assert_array_equal(m, minimax_oracle(d))


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(2, 60),
    dim=st.integers(1, 4),
    grid=st.booleans(),
)
def test_mst_route_equals_floyd_warshall(seed, n, dim, grid):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 5, size=(n, dim)).astype(float) if grid else rng.standard_normal((n, dim))
    d = DataMatrix(x)
    oracle = minimax_oracle(d)
    m = minimax_from_mst(prim_incremental(d, seed=seed))
    np.testing.assert_array_equal(m, oracle)
    assert ultrametric_violations(oracle) == 0
    assert np.all(oracle <= dissimilarity_matrix(x))
