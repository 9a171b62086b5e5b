"""Minimax (bottleneck path) distances.

The Minimax distance between two objects is the smallest achievable
largest edge over all paths joining them.  Any minimum spanning tree
carries exactly the information needed to recover it, which is what
makes the linear-memory route possible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataMatrix, Dissimilarity, dissimilarities_to, dissimilarity_matrix
from .memory import NULL_TRACKER

ORACLE_CAP = 500
DENSE_CAP = 5000


class CapExceededError(ValueError):
    pass


class SpanningTreeError(ValueError):
    pass


@dataclass(frozen=True)
class MstEdgeList:
    """The (N-1) x 3 edge table: weight and the two endpoints of each edge."""

    weights: np.ndarray
    u: np.ndarray
    v: np.ndarray
    n_objects: int

    def __len__(self):
        return len(self.weights)

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def as_matrix(self) -> np.ndarray:
        return np.column_stack([self.weights, self.u, self.v])

    def _order(self) -> np.ndarray:
        lo = np.minimum(self.u, self.v)
        hi = np.maximum(self.u, self.v)
        return np.lexsort((hi, lo, self.weights))

    def sorted(self) -> "MstEdgeList":
        """Ascending by weight; ties by (min endpoint, max endpoint)."""
        order = self._order()
        return MstEdgeList(self.weights[order], self.u[order], self.v[order], self.n_objects)

    def sort_inplace(self) -> None:
        """Same order as ``sorted`` but permutes this table's own rows."""
        order = self._order()
        for col in (self.weights, self.u, self.v):
            col[:] = col[order]

    def validate(self) -> None:
        n = self.n_objects
        if len(self) != n - 1:
            raise SpanningTreeError(f"expected {n - 1} edges for {n} objects, got {len(self)}")
        if len(self) and (min(self.u.min(), self.v.min()) < 0 or max(self.u.max(), self.v.max()) >= n):
            raise SpanningTreeError("edge endpoint out of range")
        dsu = DisjointSet(n)
        for a, b in zip(self.u.tolist(), self.v.tolist()):
            if dsu.union(a, b) is None:
                raise SpanningTreeError(f"edge ({a}, {b}) closes a cycle; edge list does not span")


class DisjointSet:
    """Union-find with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> int | None:
        """Merge the sets of a and b; return the new root, or None if already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return None
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra


def _check_kind(f: Dissimilarity) -> None:
    if f is not Dissimilarity.SQUARED_EUCLIDEAN:
        raise ValueError(f"unsupported dissimilarity {f!r}")


def prim_incremental(
    data: DataMatrix,
    f: Dissimilarity = Dissimilarity.SQUARED_EUCLIDEAN,
    seed: int = 0,
    tracker=NULL_TRACKER,
) -> MstEdgeList:
    """Prim's MST over the implicit complete graph in O(N) extra memory.

    Only the vector of best dissimilarities to the growing tree (+inf for
    objects already in it), the matching tree-side endpoint and the
    output table are kept; f is recomputed one row at a time.  The start
    object is drawn from ``seed``; argmin ties go to the lowest index.
    """
    _check_kind(f)
    x = data.values
    n = data.n_objects
    if n < 2:
        raise ValueError(f"need at least 2 objects for an MST, got {n}")

    rng = np.random.default_rng(seed)
    start = int(rng.integers(n))

    weights = np.empty(n - 1)
    tail = np.empty(n - 1, dtype=np.int64)
    head = np.empty(n - 1, dtype=np.int64)
    tracker.alloc("prim.T", 3 * (n - 1))

    best = dissimilarities_to(x, x[start])
    nearest = np.full(n, start, dtype=np.int64)
    best[start] = np.inf
    tracker.alloc("prim.l", n)
    tracker.alloc("prim.nearest", n)
    tracker.alloc("prim.f_row", n)

    for step in range(n - 1):
        u = int(np.argmin(best))
        weights[step] = best[u]
        tail[step] = nearest[u]
        head[step] = u
        best[u] = np.inf
        row = dissimilarities_to(x, x[u])
        closer = (row < best) & np.isfinite(best)
        best[closer] = row[closer]
        nearest[closer] = u

    tracker.free("prim.l", "prim.nearest", "prim.f_row")
    return MstEdgeList(weights, tail, head, n)


def minimax_from_mst(mst: MstEdgeList, dense_cap: int = DENSE_CAP) -> np.ndarray:
    """Full N x N Minimax matrix from an MST.

    Edges are replayed in ascending order; each merge writes its weight
    between every pair straddling the two merged components (the
    single-linkage cophenetic heights).
    """
    n = mst.n_objects
    if n > dense_cap:
        raise CapExceededError(f"N={n} exceeds the dense cap {dense_cap}")
    mst.validate()
    edges = mst.sorted()
    out = np.zeros((n, n))
    dsu = DisjointSet(n)
    members = {i: [i] for i in range(n)}
    for w, a, b in zip(edges.weights.tolist(), edges.u.tolist(), edges.v.tolist()):
        ra, rb = dsu.find(a), dsu.find(b)
        left, right = members.pop(ra), members.pop(rb)
        out[np.ix_(left, right)] = w
        out[np.ix_(right, left)] = w
        members[dsu.union(ra, rb)] = left + right
    return out


def minimax_oracle(
    data: DataMatrix,
    f: Dissimilarity = Dissimilarity.SQUARED_EUCLIDEAN,
    cap: int = ORACLE_CAP,
) -> np.ndarray:
    """Floyd-Warshall with (min, max) in place of (min, +). O(N^3), tests only."""
    _check_kind(f)
    n = data.n_objects
    if n > cap:
        raise CapExceededError(f"N={n} exceeds the oracle cap {cap}")
    m = dissimilarity_matrix(data.values)
    for k in range(n):
        np.minimum(m, np.maximum(m[:, k, None], m[None, k, :]), out=m)
    return m
