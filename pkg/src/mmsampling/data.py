"""Datasets, synthetic generators and the base dissimilarity."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataError(ValueError):
    pass


class Dissimilarity(enum.Enum):
    SQUARED_EUCLIDEAN = "squared_euclidean"


@dataclass(frozen=True)
class DataMatrix:
    values: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] == 0 or values.shape[1] == 0:
            raise DataError(f"values must be a non-empty 2-D matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("values contain non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (values.shape[0],):
                raise DataError(
                    f"labels length {labels.shape} does not match {values.shape[0]} objects"
                )
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n_objects(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def standardized(self) -> "DataMatrix":
        """Z-score every feature; constant features are only centred."""
        mu = self.values.mean(axis=0)
        sd = self.values.std(axis=0)
        sd[sd == 0] = 1.0
        return DataMatrix((self.values - mu) / sd, self.labels)


def factorize(raw: list[str]) -> np.ndarray:
    """Encode labels as 0..K-1 in order of first appearance."""
    codes: dict[str, int] = {}
    return np.array([codes.setdefault(x, len(codes)) for x in raw], dtype=np.int64)


def _parse_rows(rows, start_line, feature_cols, label_col, names):
    values, raw_labels = [], []
    width = None
    for lineno, row in enumerate(rows, start=start_line):
        if not row or all(not c.strip() for c in row):
            continue
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataError(f"line {lineno}: expected {width} fields, found {len(row)}")
        feats = []
        for c in feature_cols:
            cell = row[c].strip()
            try:
                x = float(cell)
            except ValueError:
                raise DataError(
                    f"line {lineno}, column {names[c]!r}: cannot parse {cell!r} as a real number"
                ) from None
            if not math.isfinite(x):
                raise DataError(f"line {lineno}, column {names[c]!r}: non-finite value {cell!r}")
            feats.append(x)
        values.append(feats)
        if label_col is not None:
            raw_labels.append(row[label_col].strip())
    return values, raw_labels


def load_csv(path, label_column: str | None = None) -> DataMatrix:
    """Read a headed, comma-separated file.

    The label column (if named) is factor-encoded and dropped from the features.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not any(h.strip() for h in header):
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        label_idx = None
        if label_column is not None:
            if label_column not in header:
                raise DataError(f"{path}: no column named {label_column!r} (have {header})")
            label_idx = header.index(label_column)
        feature_cols = [i for i in range(len(header)) if i != label_idx]
        if not feature_cols:
            raise DataError(f"{path}: no feature columns")
        values, raw_labels = _parse_rows(reader, 2, feature_cols, label_idx, header)
    if not values:
        raise DataError(f"{path}: no data rows")
    if len(values[0]) != len(feature_cols):
        raise DataError(f"{path}: rows narrower than header")
    labels = factorize(raw_labels) if label_idx is not None else None
    return DataMatrix(np.array(values), labels)


def load_table(path, label_index: int | None = -1) -> DataMatrix:
    """Read a headerless table delimited by commas, tabs or spaces.

    This is the layout of the original benchmark files (e.g. the UCI
    banknote file, or the tab-separated shape sets).  ``label_index``
    selects the ground-truth column; ``None`` means no labels.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    rows = [ln.replace(",", " ").split() for ln in lines]
    if not any(rows):
        raise DataError(f"{path}: empty file")
    width = len(next(r for r in rows if r))
    names = [f"#{i}" for i in range(width)]
    label_col = None if label_index is None else range(width)[label_index]
    feature_cols = [i for i in range(width) if i != label_col]
    values, raw_labels = _parse_rows(rows, 1, feature_cols, label_col, names)
    labels = factorize(raw_labels) if label_col is not None else None
    return DataMatrix(np.array(values), labels)


def save_csv(data: DataMatrix, path, label_column: str = "label") -> None:
    path = Path(path)
    names = [f"x{d}" for d in range(data.n_features)]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names + ([label_column] if data.labels is not None else []))
        for i in range(data.n_objects):
            row = [repr(float(x)) for x in data.values[i]]
            if data.labels is not None:
                row.append(str(int(data.labels[i])))
            w.writerow(row)


def dissimilarity(data: DataMatrix, i: int, j: int) -> float:
    n = data.n_objects
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"object index out of range: ({i}, {j}) with N={n}")
    return float(dissimilarities_to(data.values, data.values[i])[j])


def dissimilarities_to(values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance from one point to every row of ``values``.

    Every pairwise value in the package goes through here, so f(i, j) is
    bitwise identical whichever side computes it.
    """
    # Column-wise accumulation keeps a fixed summation order per element;
    # a reduction kernel may reorder depending on alignment.
    out = np.zeros(values.shape[0])
    for d in range(values.shape[1]):
        diff = values[:, d] - x[d]
        out += diff * diff
    return out


def dissimilarity_matrix(values: np.ndarray) -> np.ndarray:
    """Dense f over all pairs. Quadratic memory; small inputs only."""
    return np.stack([dissimilarities_to(values, x) for x in values])


SYNTHETIC_CLUSTERS = {"two_blobs": 2, "three_spirals": 3}


def generate_synthetic(name: str, n: int, seed: int = 0) -> DataMatrix:
    if name not in SYNTHETIC_CLUSTERS:
        raise DataError(f"unknown generator {name!r}; choose from {sorted(SYNTHETIC_CLUSTERS)}")
    k = SYNTHETIC_CLUSTERS[name]
    if n < 3 * k:
        raise DataError(f"{name} needs n >= {3 * k}, got {n}")
    rng = np.random.default_rng(seed)
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    labels = np.repeat(np.arange(k), sizes)
    if name == "two_blobs":
        centers = np.array([[0.0, 0.0], [20.0, 0.0]])
        values = centers[labels] + rng.standard_normal((n, 2))
    else:
        values = np.concatenate([_spiral_arm(m, 2 * np.pi * a / k, rng) for a, m in enumerate(sizes)])
    return DataMatrix(values, labels)


def _spiral_arm(m: int, phase: float, rng: np.random.Generator) -> np.ndarray:
    # Archimedean arm r = theta; adjacent arms sit 2*pi/3 apart radially,
    # points are spaced roughly evenly in arc length.
    t0, t1 = 1.5, 12.5
    u = np.linspace(0.0, 1.0, m)
    theta = np.sqrt(t0 ** 2 + u * (t1 ** 2 - t0 ** 2))
    theta = theta + rng.uniform(-0.15, 0.15, m) / theta
    xy = np.column_stack([theta * np.cos(theta + phase), theta * np.sin(theta + phase)])
    return xy + 0.08 * rng.standard_normal((m, 2))
