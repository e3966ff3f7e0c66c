"""Binary-classification datasets: CSV I/O, scaling, splitting, label noise, generators."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

import numpy as np


class DataError(ValueError):
    """Malformed or unusable dataset input."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (one row per sample) with labels in {-1, +1}."""

    features: np.ndarray
    labels: np.ndarray
    names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError(f"features must be a non-empty 2-D matrix, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataError(f"expected {X.shape[0]} labels, got shape {y.shape}")
        if not np.all(np.isfinite(X)):
            raise DataError("features contain non-finite values")
        if not np.all((y == 1) | (y == -1)):
            raise DataError("labels must be -1 or +1")
        if self.names is not None and len(self.names) != X.shape[1]:
            raise DataError("names must match the number of feature columns")
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "labels", _frozen(y.astype(np.int64)))
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.features[idx], self.labels[idx], self.names)

    def with_labels(self, labels) -> "Dataset":
        return Dataset(self.features, labels, self.names)

    def class_split(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (A, B): rows labelled +1 and rows labelled -1."""
        pos = self.labels == 1
        return self.features[pos], self.features[~pos]


@dataclass(frozen=True)
class NormParams:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise DataError("normalization bounds must satisfy lo <= hi elementwise")
        object.__setattr__(self, "lo", _frozen(lo))
        object.__setattr__(self, "hi", _frozen(hi))

    def _span(self) -> np.ndarray:
        span = self.hi - self.lo
        return np.where(span > 0, span, 1.0)

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = (X - self.lo) / self._span()
        # constant columns map to 0
        out[:, self.hi == self.lo] = 0.0
        return out

    def invert(self, Xn: np.ndarray) -> np.ndarray:
        return np.asarray(Xn, dtype=np.float64) * self._span() + self.lo

    def to_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "NormParams":
        return cls(np.asarray(d["lo"]), np.asarray(d["hi"]))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

_AUTO_LABEL_MAPS = (
    ({-1.0, 1.0}, {-1.0: -1, 1.0: 1}),
    ({0.0, 1.0}, {0.0: -1, 1.0: 1}),
    ({1.0, 2.0}, {1.0: -1, 2.0: 1}),
)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _map_labels(raw: list[str], label_map: Optional[Mapping]) -> np.ndarray:
    if label_map is not None:
        lookup = {str(k): int(v) for k, v in label_map.items()}
        out = []
        for r in raw:
            key = r if r in lookup else None
            if key is None and _is_number(r):
                # allow "1.0" to match a declared key of 1
                for k in lookup:
                    if _is_number(k) and float(k) == float(r):
                        key = k
                        break
            if key is None:
                raise DataError(f"label {r!r} not covered by label_map")
            out.append(lookup[key])
        y = np.asarray(out)
        if not np.all((y == 1) | (y == -1)):
            raise DataError("label_map must map onto {-1, +1}")
        return y
    try:
        vals = [float(r) for r in raw]
    except ValueError as exc:
        raise DataError(f"non-numeric label value: {exc}") from None
    present = set(vals)
    for allowed, mapping in _AUTO_LABEL_MAPS:
        if present <= allowed:
            return np.asarray([mapping[v] for v in vals])
    raise DataError(f"cannot map label values {sorted(present)} onto {{-1, +1}}")


def load_csv(
    path,
    label_column: int = -1,
    label_map: Optional[Mapping] = None,
) -> Dataset:
    """Read a comma-separated file into a :class:`Dataset`.

    A first row in which no field parses as a number is taken as a header.
    Labels {0,1} and {1,2} are remapped to {-1,+1} with the smaller value
    becoming -1; pass ``label_map`` for anything else.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")

    header = None
    if not any(_is_number(c.strip()) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise DataError(f"{path} has a header but no data rows")

    width = len(rows[0])
    if width < 2:
        raise DataError("need at least one feature column and one label column")
    col = label_column if label_column >= 0 else width + label_column
    if not 0 <= col < width:
        raise DataError(f"label column {label_column} out of range for {width} columns")

    feats: list[list[float]] = []
    raw_labels: list[str] = []
    for lineno, row in enumerate(rows, start=2 if header else 1):
        if len(row) != width:
            raise DataError(f"row {lineno}: expected {width} columns, found {len(row)}")
        vals = []
        for j, cell in enumerate(row):
            if j == col:
                continue
            try:
                vals.append(float(cell))
            except ValueError:
                raise DataError(f"row {lineno}: non-numeric feature {cell!r}") from None
        feats.append(vals)
        raw_labels.append(row[col].strip())

    y = _map_labels(raw_labels, label_map)
    names = None
    if header is not None and len(header) == width:
        names = tuple(h for j, h in enumerate(header) if j != col)
    return Dataset(np.asarray(feats, dtype=np.float64), y, names)


def write_csv(d: Dataset, path, header: bool = True) -> None:
    """Write features then label (last column); the inverse of :func:`load_csv`."""
    path = Path(path)
    names = d.names or tuple(f"x{j}" for j in range(d.n_features))
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow([*names, "label"])
        for x, yi in zip(d.features, d.labels):
            w.writerow([repr(float(v)) for v in x] + [int(yi)])


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------


def minmax_normalize(d: Dataset) -> tuple[Dataset, NormParams]:
    params = NormParams(d.features.min(axis=0), d.features.max(axis=0))
    return Dataset(params.apply(d.features), d.labels, d.names), params


def train_test_split(d: Dataset, train_fraction: float = 0.7, seed: int = 0) -> tuple[Dataset, Dataset]:
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    m = d.m
    n_train = int(math.floor(train_fraction * m + 0.5))
    if n_train < 1 or n_train > m - 1:
        raise DataError(f"a {train_fraction} split of {m} samples leaves one side empty")
    perm = np.random.default_rng(seed).permutation(m)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    return d.subset(train_idx), d.subset(test_idx)


def split_indices(m: int, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Index form of :func:`train_test_split` (same partition for the same seed)."""
    n_train = int(math.floor(train_fraction * m + 0.5))
    perm = np.random.default_rng(seed).permutation(m)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def inject_label_noise(d: Dataset, rate: float, seed: int = 0) -> Dataset:
    """Flip exactly ``floor(rate * m)`` labels at distinct random positions."""
    if not 0.0 <= rate <= 0.5:
        raise DataError(f"noise rate must lie in [0, 0.5], got {rate}")
    n_flip = int(math.floor(rate * d.m + 1e-9))
    if n_flip == 0:
        return d
    idx = np.random.default_rng(seed).choice(d.m, size=n_flip, replace=False)
    y = d.labels.copy()
    y[idx] = -y[idx]
    return d.with_labels(y)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def gen_crossplane(n: int = 130, jitter: float = 0.01, seed: int = 0) -> Dataset:
    """Two lines through the origin, one per class, plus isotropic Gaussian jitter.

    Class +1 lies along y = x, class -1 along y = -x. Positions along each
    line are uniform on [-1, 1].
    """
    if n < 4:
        raise DataError("crossplane needs at least 4 samples")
    if jitter < 0:
        raise DataError("jitter must be non-negative")
    rng = np.random.default_rng(seed)
    n_pos = (n + 1) // 2
    n_neg = n - n_pos
    t_pos = rng.uniform(-1.0, 1.0, n_pos)
    t_neg = rng.uniform(-1.0, 1.0, n_neg)
    X = np.concatenate([np.c_[t_pos, t_pos], np.c_[t_neg, -t_neg]])
    if jitter > 0:
        X = X + rng.normal(0.0, jitter, X.shape)
    y = np.r_[np.ones(n_pos, dtype=int), -np.ones(n_neg, dtype=int)]
    order = rng.permutation(n)
    return Dataset(X[order], y[order], ("x", "y"))


def gen_ndc(
    n: int = 10_000,
    dim: int = 32,
    separation: float = 4.0,
    seed: int = 0,
    clusters_per_class: int = 8,
) -> Dataset:
    """Normally distributed clusters labelled by a random hyperplane.

    Cluster means sit on alternating sides of a random hyperplane through the
    origin, at least ``separation / 2`` (in units of the unit within-cluster
    scale) away from it. Each cluster has a random covariance with
    eigenvalues in [0.5, 1.5]. Samples are spread evenly over the clusters,
    so the two classes differ in size by at most one.
    """
    if n < 2 or dim < 1:
        raise DataError("gen_ndc needs n >= 2 and dim >= 1")
    if clusters_per_class < 1:
        raise DataError("clusters_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    normal = rng.normal(size=dim)
    normal /= np.linalg.norm(normal)
    n_clusters = 2 * clusters_per_class
    sides = np.tile([1.0, -1.0], clusters_per_class)

    spread = max(separation, 1.0)
    means = rng.normal(0.0, spread, (n_clusters, dim))
    means -= np.outer(means @ normal, normal)
    offsets = separation / 2.0 + rng.uniform(0.0, spread / 2.0, n_clusters)
    means += np.outer(sides * offsets, normal)

    factors = []
    for _ in range(n_clusters):
        q, _r = np.linalg.qr(rng.normal(size=(dim, dim)))
        scales = np.sqrt(rng.uniform(0.5, 1.5, dim))
        factors.append(q * scales)

    counts = np.full(n_clusters, n // n_clusters)
    counts[: n % n_clusters] += 1
    X = np.empty((n, dim))
    y = np.empty(n, dtype=int)
    pos = 0
    for c in range(n_clusters):
        k = counts[c]
        X[pos : pos + k] = means[c] + rng.normal(size=(k, dim)) @ factors[c].T
        y[pos : pos + k] = int(sides[c])
        pos += k
    order = rng.permutation(n)
    return Dataset(X[order], y[order])
