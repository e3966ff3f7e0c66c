"""Linear-algebra back-ends: ridge-regularised SPD solves and cyclic coordinate
minimisation for the unconstrained dual quadratic programs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from . import _kernels


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-8
    max_sweeps: Optional[int] = None  # None -> 10 * n + 1000
    ridge: float = 1e-8

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.ridge < 0:
            raise ValueError("ridge must be non-negative")
        if self.max_sweeps is not None and self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")

    def sweeps_for(self, n: int) -> int:
        return self.max_sweeps if self.max_sweeps is not None else 10 * n + 1000


@dataclass
class QpResult:
    z: np.ndarray
    converged: bool
    sweeps: int
    grad_norm: float
    objective: np.ndarray  # value after each sweep, index 0 = starting point


def _ridge_shift(M: np.ndarray, ridge: float) -> float:
    n = M.shape[0]
    tr = float(np.trace(M))
    scale = tr / n if tr > 0 else 1.0
    return ridge * scale


def solve_spd(M, rhs, ridge: float = 1e-8) -> np.ndarray:
    """Solve ``(M + ridge * tr(M)/n * I) z = rhs`` by Cholesky factorisation."""
    M = np.asarray(M, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if rhs.shape[0] != M.shape[0]:
        raise ValueError("right-hand side does not match matrix size")
    shift = _ridge_shift(M, ridge)
    A = M + shift * np.eye(M.shape[0])
    try:
        factor = linalg.cho_factor(A, lower=True, check_finite=True)
    except linalg.LinAlgError as exc:
        raise SolverError(
            f"Cholesky factorisation failed with ridge {ridge:g} (diagonal shift {shift:g}): {exc}"
        ) from exc
    return linalg.cho_solve(factor, rhs)


def _check_qp(Q: np.ndarray, b: np.ndarray) -> None:
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError(f"Q must be square, got {Q.shape}")
    if b.shape != (Q.shape[0],):
        raise ValueError("b does not match Q")
    if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-10 * max(1.0, np.abs(Q).max(initial=0.0))):
        raise ValueError("Q is not symmetric")
    if np.any(np.diag(Q) <= 0):
        raise ValueError("Q must have a strictly positive diagonal")


def qp_coordinate_ascent(Q, b, cfg: SolverConfig = SolverConfig(), z0=None) -> QpResult:
    """Minimise ``0.5 z'Qz + b'z`` by exact cyclic single-coordinate steps.

    Equivalent to maximising the concave dual ``-0.5 z'Qz - b'z``. Stops once
    ``||Qz + b||_inf <= cfg.tolerance``; when the sweep budget runs out the
    last iterate is returned with ``converged=False``.
    """
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    _check_qp(Q, b)
    n = Q.shape[0]
    z = np.zeros(n) if z0 is None else np.array(z0, dtype=np.float64)
    z, g, sweeps, hist = _kernels.cd_dense(Q, b, z, cfg.tolerance, cfg.sweeps_for(n))
    gn = float(np.max(np.abs(g))) if n else 0.0
    return QpResult(z, gn <= cfg.tolerance, int(sweeps), gn, np.asarray(hist))


def qp_coordinate_ascent_factored(Z, d, b, cfg: SolverConfig = SolverConfig(), z0=None) -> QpResult:
    """:func:`qp_coordinate_ascent` for ``Q = Z Z' + diag(d)`` without forming Q.

    Each coordinate step costs O(cols(Z)) instead of O(n), which is what makes
    the linear dual practical when the number of balls is large.
    """
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    d = np.ascontiguousarray(d, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    n = Z.shape[0]
    if d.shape != (n,) or b.shape != (n,):
        raise ValueError("d and b must have one entry per row of Z")
    if np.any(np.einsum("ij,ij->i", Z, Z) + d <= 0):
        raise ValueError("Q must have a strictly positive diagonal")
    z = np.zeros(n) if z0 is None else np.array(z0, dtype=np.float64)
    z, g, sweeps, hist = _kernels.cd_factored(Z, d, b, z, cfg.tolerance, cfg.sweeps_for(n))
    gn = float(np.max(np.abs(g))) if n else 0.0
    return QpResult(z, gn <= cfg.tolerance, int(sweeps), gn, np.asarray(hist))
