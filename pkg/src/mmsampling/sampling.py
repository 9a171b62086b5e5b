"""Sample selection: Minimax (MM) sampling over the MST, k-means, k-DPP and random.

Every sampler returns ``ceil(sqrt(N))`` samples unless told otherwise and
a total object -> sample assignment.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clustering import assign_nearest, lloyd
from .data import DataMatrix, Dissimilarity, dissimilarities_to
from .memory import NULL_TRACKER
from .minimax import CapExceededError, DisjointSet, MstEdgeList, minimax_from_mst, prim_incremental

DPP_CAP = 3000
METHODS = ("mm", "kmeans", "dpp", "random")


def default_num_samples(n: int) -> int:
    return math.isqrt(n - 1) + 1 if n > 0 else 0


@dataclass(frozen=True)
class SubsetAssignment:
    """Object -> subset id, plus the dense renumbering of the ids."""

    subset_id: np.ndarray
    sample_index: dict[int, int]

    @classmethod
    def from_ids(cls, subset_id) -> "SubsetAssignment":
        # dense order = order of each subset's smallest member
        subset_id = np.asarray(subset_id, dtype=np.int64)
        index: dict[int, int] = {}
        for sid in subset_id.tolist():
            if sid not in index:
                index[sid] = len(index)
        return cls(subset_id, index)

    @property
    def n_subsets(self) -> int:
        return len(self.sample_index)

    @property
    def dense(self) -> np.ndarray:
        lookup = self.sample_index
        return np.fromiter((lookup[s] for s in self.subset_id.tolist()), dtype=np.int64, count=len(self.subset_id))


@dataclass(frozen=True)
class SampleSet:
    method: str
    assignment: SubsetAssignment
    representatives: np.ndarray | None = None
    selected: np.ndarray | None = None
    seed: int | None = None

    @property
    def s(self) -> int:
        return self.assignment.n_subsets

    @property
    def n_objects(self) -> int:
        return len(self.assignment.subset_id)

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "s": self.s,
            "subset_id": self.assignment.dense.tolist(),
            "selected": None if self.selected is None else self.selected.tolist(),
            "representatives": None if self.representatives is None else self.representatives.tolist(),
        }

    @classmethod
    def from_json(cls, record: dict) -> "SampleSet":
        reps = record.get("representatives")
        sel = record.get("selected")
        return cls(
            method=record["method"],
            assignment=SubsetAssignment.from_ids(record["subset_id"]),
            representatives=None if reps is None else np.asarray(reps, dtype=np.float64),
            selected=None if sel is None else np.asarray(sel, dtype=np.int64),
            seed=record.get("seed"),
        )


def save_samples(samples: SampleSet, path) -> None:
    Path(path).write_text(json.dumps(samples.to_json(), sort_keys=True) + "\n", encoding="utf-8")


def load_samples(path) -> SampleSet:
    return SampleSet.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def mm_sample(
    mst: MstEdgeList,
    n: int | None = None,
    num_samples: int | None = None,
    tracker=NULL_TRACKER,
    inplace: bool = False,
):
    """MM sampling: cut the MST at its ``s - 1`` heaviest edges.

    The lightest ``n - s`` edges (ascending, ties by endpoint pair) merge
    objects into ``s`` subsets.  Replaying the remaining edges merges whole
    groups of subsets; each such edge weight is the Minimax distance
    between every subset on one side and every subset on the other.

    With ``inplace`` the rows of ``mst`` itself are sorted instead of a copy.
    Returns ``(SampleSet, M_s)``.
    """
    n = mst.n_objects if n is None else n
    if n != mst.n_objects:
        raise ValueError(f"edge list covers {mst.n_objects} objects, not {n}")
    if n < 4:
        raise ValueError(f"MM sampling needs n >= 4, got {n}")
    s = default_num_samples(n) if num_samples is None else num_samples
    if not 1 <= s <= n:
        raise ValueError(f"number of samples {s} out of range for n={n}")
    tracker.alloc("mm.validate", 2 * n)
    mst.validate()
    tracker.free("mm.validate")

    tracker.alloc("mm.order", n - 1)
    if inplace:
        mst.sort_inplace()
        edges = mst
    else:
        edges = mst.sorted()
        tracker.alloc("mm.T_sorted", 3 * (n - 1))
    tracker.free("mm.order")

    dsu = DisjointSet(n)
    tracker.alloc("mm.dsu", 2 * n)
    cut = n - s
    for a, b in zip(edges.u[:cut].tolist(), edges.v[:cut].tolist()):
        dsu.union(a, b)

    roots = np.fromiter((dsu.find(i) for i in range(n)), dtype=np.int64, count=n)
    tracker.alloc("mm.subset_id", n)
    assignment = SubsetAssignment.from_ids(roots)

    m_s = np.zeros((s, s))
    tracker.alloc("mm.M_s", s * s)
    groups = {root: [idx] for root, idx in assignment.sample_index.items()}
    for w, a, b in zip(edges.weights[cut:].tolist(), edges.u[cut:].tolist(), edges.v[cut:].tolist()):
        ra, rb = dsu.find(a), dsu.find(b)
        left, right = groups.pop(ra), groups.pop(rb)
        m_s[np.ix_(left, right)] = w
        m_s[np.ix_(right, left)] = w
        groups[dsu.union(ra, rb)] = left + right
    tracker.free("mm.dsu", "mm.T_sorted")
    return SampleSet("mm", assignment), m_s


def _with_dense_order(method, which, reps, selected, seed):
    # renumber samples by smallest member; drop representatives nobody uses
    assignment = SubsetAssignment.from_ids(which)
    order = sorted(assignment.sample_index, key=assignment.sample_index.get)
    reps = None if reps is None else reps[order]
    selected = None if selected is None else selected[order]
    return SampleSet(method, SubsetAssignment.from_ids(assignment.dense), reps, selected, seed)


def kmeans_sample(
    data: DataMatrix,
    f: Dissimilarity = Dissimilarity.SQUARED_EUCLIDEAN,
    seed: int = 0,
    num_samples: int | None = None,
) -> SampleSet:
    """k-means with k = ceil(sqrt(N)); the centroids are the samples."""
    n = data.n_objects
    k = default_num_samples(n) if num_samples is None else num_samples
    if n < 4:
        raise ValueError(f"k-means sampling needs N >= 4, got {n}")
    if n < k:
        raise ValueError(f"N={n} is smaller than k={k}")
    centers, labels, _ = lloyd(data.values, k, np.random.default_rng(seed))
    return _with_dense_order("kmeans", labels, centers, None, seed)


def random_sample(
    data: DataMatrix,
    f: Dissimilarity = Dissimilarity.SQUARED_EUCLIDEAN,
    seed: int = 0,
    num_samples: int | None = None,
) -> SampleSet:
    n = data.n_objects
    if n < 4:
        raise ValueError(f"random sampling needs N >= 4, got {n}")
    k = default_num_samples(n) if num_samples is None else num_samples
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(n, size=k, replace=False))
    which, _ = assign_nearest(data.values, data.values[chosen])
    return _with_dense_order("random", which, data.values[chosen], chosen, seed)


def rbf_kernel(data: DataMatrix, rng: np.random.Generator, n_pairs: int = 1000) -> np.ndarray:
    """exp(-f / (2 sigma^2)), sigma^2 the median f over random distinct pairs."""
    x = data.values
    n = data.n_objects
    i = rng.integers(n, size=n_pairs)
    j = (i + rng.integers(1, n, size=n_pairs)) % n
    diff = x[i] - x[j]
    sigma2 = float(np.median((diff * diff).sum(axis=1)))
    if sigma2 <= 0:
        sigma2 = 1.0
    kernel = np.stack([dissimilarities_to(x, row) for row in x])
    np.exp(-kernel / (2 * sigma2), out=kernel)
    return kernel


def elementary_symmetric(lam: np.ndarray, k: int) -> np.ndarray:
    """E[l, m] = e_l(lam[:m]) for l <= k, m <= len(lam)."""
    n = len(lam)
    e = np.zeros((k + 1, n + 1))
    e[0, :] = 1.0
    for m in range(1, n + 1):
        e[1:, m] = e[1:, m - 1] + lam[m - 1] * e[:-1, m - 1]
    return e


def sample_k_dpp(kernel: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Exact k-DPP draw from an L-ensemble kernel.

    Picks k eigenvectors with probability proportional to the product of
    their eigenvalues, then samples the elementary DPP they span.
    """
    n = kernel.shape[0]
    if not np.allclose(kernel, kernel.T, rtol=0, atol=1e-12):
        raise ValueError("DPP kernel must be symmetric")
    try:
        lam, vecs = np.linalg.eigh(kernel)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"kernel eigendecomposition failed: {exc}") from exc
    if lam.min() < -1e-9 * max(1.0, abs(lam.max())):
        raise ValueError(f"DPP kernel is not PSD (min eigenvalue {lam.min():.3g})")
    lam = np.clip(lam, 0.0, None)
    lam = lam / lam.mean()
    e = elementary_symmetric(lam, k)
    if e[k, n] <= 0:
        raise ValueError(f"kernel rank is below k={k}")

    picked = []
    remaining = k
    for m in range(n, 0, -1):
        if remaining == 0:
            break
        if m == remaining:
            p = 1.0
        else:
            p = lam[m - 1] * e[remaining - 1, m - 1] / e[remaining, m]
        if rng.random() < p:
            picked.append(m - 1)
            remaining -= 1
    v = vecs[:, picked]

    chosen = []
    while v.shape[1] > 0:
        weight = (v * v).sum(axis=1)
        weight[chosen] = 0.0
        i = int(rng.choice(n, p=weight / weight.sum()))
        chosen.append(i)
        j = int(np.argmax(np.abs(v[i])))
        pivot = v[:, j] / v[i, j]
        v = v - np.outer(pivot, v[i])
        v = np.delete(v, j, axis=1)
        if v.shape[1]:
            v, _ = np.linalg.qr(v)
    return np.sort(np.array(chosen, dtype=np.int64))


def dpp_sample(
    data: DataMatrix,
    f: Dissimilarity = Dissimilarity.SQUARED_EUCLIDEAN,
    seed: int = 0,
    num_samples: int | None = None,
    cap: int = DPP_CAP,
) -> SampleSet:
    """k-DPP sampling over an RBF kernel.

    The kernel is N x N, so this sampler is meant to run offline; results
    can be shipped to a memory-constrained run via ``save_samples``.
    """
    n = data.n_objects
    if n > cap:
        raise CapExceededError(f"N={n} exceeds the DPP cap {cap}")
    k = default_num_samples(n) if num_samples is None else num_samples
    if k > n:
        raise ValueError(f"k={k} exceeds N={n}")
    rng = np.random.default_rng(seed)
    kernel = rbf_kernel(data, rng)
    chosen = sample_k_dpp(kernel, k, rng)
    del kernel
    which, _ = assign_nearest(data.values, data.values[chosen])
    return _with_dense_order("dpp", which, data.values[chosen], chosen, seed)


def sample_minimax(
    samples: SampleSet,
    data: DataMatrix | None = None,
    f: Dissimilarity = Dissimilarity.SQUARED_EUCLIDEAN,
    seed: int = 0,
) -> np.ndarray:
    """Minimax matrix among the representatives (s x s, so O(N) entries)."""
    if samples.method == "mm":
        raise ValueError("MM samples carry their Minimax matrix from mm_sample")
    if samples.representatives is None:
        raise ValueError(f"{samples.method} sample set has no representatives")
    reps = samples.representatives
    if len(reps) == 1:
        return np.zeros((1, 1))
    mst = prim_incremental(DataMatrix(reps), f, seed=seed)
    return minimax_from_mst(mst)


SAMPLERS = {"kmeans": kmeans_sample, "dpp": dpp_sample, "random": random_sample}
