"""Euclidean embedding of a Minimax matrix by classical scaling.

Minimax distances are ultrametric, so the double-centred matrix is
positive semidefinite and its scaled eigenvectors reproduce the Minimax
values as squared Euclidean distances.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CLIP_TOL = 1e-9
DEFAULT_MAX_DIM = 50


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def size(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class Embedding:
    coords: np.ndarray
    d_prime: int
    spectrum: np.ndarray


def to_mercer_kernel(m: np.ndarray) -> np.ndarray:
    """K = -1/2 J M J with J the centering matrix."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(float(np.abs(m).max(initial=0.0)), 1.0)
    if not np.allclose(m, m.T, rtol=0, atol=1e-12 * scale):
        raise ValueError("distance matrix is not symmetric")
    if (m < 0).any():
        raise ValueError("distance matrix has negative entries")
    # J M J without forming J
    k = m - m.mean(axis=0, keepdims=True)
    k -= k.mean(axis=1, keepdims=True)
    k *= -0.5
    return 0.5 * (k + k.T)


def eigendecompose(k: np.ndarray, clip_tol: float = CLIP_TOL) -> EigenSystem:
    """Symmetric eigendecomposition, eigenvalues descending.

    Eigenvalues in [-clip_tol * lambda_max, 0) are floating-point noise on a
    PSD kernel and are set to 0; anything more negative is kept and warned
    about.  Each eigenvector's largest-magnitude entry is made positive.
    """
    k = np.asarray(k, dtype=np.float64)
    scale = max(float(np.abs(k).max(initial=0.0)), 1.0)
    if not np.allclose(k, k.T, rtol=0, atol=1e-10 * scale):
        raise ValueError("kernel is not symmetric")
    try:
        lam, vecs = np.linalg.eigh(k)
    except np.linalg.LinAlgError as exc:
        residual = float(np.abs(k - np.diag(np.diag(k))).max(initial=0.0))
        raise RuntimeError(f"eigendecomposition did not converge (off-diagonal mass {residual:.3g})") from exc
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    vecs = vecs[:, order]
    top = max(float(lam[0]), 0.0) if len(lam) else 0.0
    tol = clip_tol * top
    if (lam < -tol).any():
        warnings.warn(
            f"kernel has negative eigenvalues down to {lam.min():.3g} (largest {top:.3g})",
            RuntimeWarning,
        )
    lam = np.where((lam < 0) & (lam >= -tol), 0.0, lam)
    pivots = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivots, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return EigenSystem(lam, vecs * signs)


def normalized_spectrum(eig: EigenSystem) -> np.ndarray:
    top = eig.eigenvalues[0]
    if top <= 0:
        raise ValueError("no positive eigenvalue")
    return eig.eigenvalues / top


def select_dimension(eig: EigenSystem, max_dim: int = DEFAULT_MAX_DIM) -> int:
    """Elbow rule: the index before the largest drop in the normalized spectrum.

    Candidates are 1..min(s-1, max_dim) with normalized eigenvalue above
    1e-6; ties resolve to the smallest index.
    """
    spec = normalized_spectrum(eig)
    upper = min(len(spec) - 1, max_dim)
    if upper < 1:
        return 1
    drops = spec[:upper] - spec[1 : upper + 1]
    drops = np.where(spec[:upper] > 1e-6, drops, -np.inf)
    return int(np.argmax(drops)) + 1


def embed(eig: EigenSystem, d_prime: int) -> Embedding:
    s = eig.size
    if not 1 <= d_prime <= s:
        raise ValueError(f"d' must be in [1, {s}], got {d_prime}")
    lam = eig.eigenvalues[:d_prime]
    if (lam < 0).any():
        raise ValueError(f"negative eigenvalue inside the first {d_prime} dimensions")
    coords = eig.eigenvectors[:, :d_prime] * np.sqrt(lam)
    top = eig.eigenvalues[0]
    spectrum = eig.eigenvalues / top if top > 0 else eig.eigenvalues.copy()
    return Embedding(coords, d_prime, spectrum)


def embed_minimax(m: np.ndarray, d_prime: int | None = None, max_dim: int = DEFAULT_MAX_DIM) -> Embedding:
    """Kernel, eigendecomposition, elbow choice of d' (unless given) and embedding."""
    eig = eigendecompose(to_mercer_kernel(m))
    if d_prime is None:
        d_prime = select_dimension(eig, max_dim) if eig.eigenvalues[0] > 0 else 1
    return embed(eig, d_prime)


def write_spectrum_csv(embedding: Embedding, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "normalized_eigenvalue", "selected"])
        for i, value in enumerate(embedding.spectrum.tolist(), start=1):
            w.writerow([i, repr(value), int(i == embedding.d_prime)])
