"""Linear and Gaussian kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "gaussian"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise ValueError(f"gaussian kernel needs sigma > 0, got {self.sigma}")

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls("linear")

    @classmethod
    def gaussian(cls, sigma: float) -> "KernelSpec":
        return cls("gaussian", float(sigma))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma}


def kernel_value(x, y, spec: KernelSpec) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if spec.kind == "linear":
        return float(x @ y)
    diff = x - y
    return float(np.exp(-(diff @ diff) / (2.0 * spec.sigma**2)))


def sq_distances(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances via the expanded form, clamped at 0."""
    xx = np.einsum("ij,ij->i", X, X)
    yy = np.einsum("ij,ij->i", Y, Y)
    d2 = xx[:, None] + yy[None, :] - 2.0 * (X @ Y.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def gram(X, Y, spec: KernelSpec) -> np.ndarray:
    """Kernel matrix with entry (i, j) = K(X[i], Y[j])."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if spec.kind == "linear":
        return X @ Y.T
    if X is Y:
        d2 = sq_distances(X, X)
        # exact symmetry and zero self-distance
        d2 = 0.5 * (d2 + d2.T)
        np.fill_diagonal(d2, 0.0)
    else:
        d2 = sq_distances(X, Y)
    return np.exp(-d2 / (2.0 * spec.sigma**2))
