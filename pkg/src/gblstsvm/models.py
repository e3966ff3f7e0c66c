"""LSTSVM, GBLSTSVM and LS-GBLSTSVM trainers and the nearest-plane classifier."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .dataset import Dataset, NormParams
from .granular import BallSet, generate_balls
from .kernel import KernelSpec, gram
from .solver import SolverConfig, qp_coordinate_ascent, qp_coordinate_ascent_factored, solve_spd

VARIANTS = ("lstsvm", "gblstsvm", "lsgblstsvm")
_DEGENERATE_NORM = 1e-12


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class HyperParams:
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    sigma: float = 1.0
    pur: float = 0.95
    num: int = 2

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "c4", "sigma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.5 < self.pur <= 1.0:
            raise ValueError("pur must lie in (0.5, 1]")
        if int(self.num) != self.num or self.num < 2:
            raise ValueError("num must be an integer >= 2")

    def tied(self) -> "HyperParams":
        """Apply the c1 = c2, c3 = c4 convention."""
        return replace(self, c2=self.c1, c4=self.c3)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("c1", "c2", "c3", "c4", "sigma", "pur", "num")}


@dataclass(frozen=True)
class DualSolution:
    alpha: np.ndarray
    beta: np.ndarray
    lambda_: np.ndarray
    theta: np.ndarray
    converged: bool = True
    sweeps: tuple[int, int] = (0, 0)


def _distance(f: np.ndarray, wnorm: float, b: float) -> np.ndarray:
    if wnorm < _DEGENERATE_NORM:
        return np.full_like(f, abs(b))
    return np.abs(f) / wnorm


def _nearest_plane(d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    return np.where(d1 <= d2, 1, -1)


@dataclass(frozen=True)
class PlanePair:
    """Two hyperplanes ``x'w_i + b_i = 0``; plane 1 hugs class +1, plane 2 class -1."""

    w1: np.ndarray
    b1: float
    w2: np.ndarray
    b2: float
    dual: Optional[DualSolution] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        w1 = np.asarray(self.w1, dtype=np.float64).reshape(-1)
        w2 = np.asarray(self.w2, dtype=np.float64).reshape(-1)
        if w1.shape != w2.shape:
            raise ValueError("w1 and w2 differ in length")
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "w2", w2)
        object.__setattr__(self, "b1", float(self.b1))
        object.__setattr__(self, "b2", float(self.b2))

    @property
    def n_features(self) -> int:
        return self.w1.shape[0]

    def decision(self, X) -> tuple[np.ndarray, np.ndarray]:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X @ self.w1 + self.b1, X @ self.w2 + self.b2

    def plane_distances(self, X) -> tuple[np.ndarray, np.ndarray]:
        f1, f2 = self.decision(X)
        return (
            _distance(f1, float(np.linalg.norm(self.w1)), self.b1),
            _distance(f2, float(np.linalg.norm(self.w2)), self.b2),
        )

    def predict(self, X) -> np.ndarray:
        return _nearest_plane(*self.plane_distances(X))

    def scaled(self, g1: float, g2: float) -> "PlanePair":
        return PlanePair(g1 * self.w1, g1 * self.b1, g2 * self.w2, g2 * self.b2)

    def to_dict(self) -> dict:
        return {"type": "linear", "w1": self.w1.tolist(), "b1": self.b1, "w2": self.w2.tolist(), "b2": self.b2}


@dataclass(frozen=True)
class KernelPlanePair:
    """Kernel expansion ``f_i(x) = sum_j u_i[j] K(anchor_j, x) + b_i``."""

    u1: np.ndarray
    b1: float
    u2: np.ndarray
    b2: float
    anchors: np.ndarray
    spec: KernelSpec
    gram_anchors: Optional[np.ndarray] = None
    dual: Optional[DualSolution] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        anchors = np.atleast_2d(np.asarray(self.anchors, dtype=np.float64))
        u1 = np.asarray(self.u1, dtype=np.float64).reshape(-1)
        u2 = np.asarray(self.u2, dtype=np.float64).reshape(-1)
        if u1.shape[0] != anchors.shape[0] or u2.shape[0] != anchors.shape[0]:
            raise ValueError("coefficient vectors must have one entry per anchor")
        G = gram(anchors, anchors, self.spec) if self.gram_anchors is None else np.asarray(self.gram_anchors)
        object.__setattr__(self, "anchors", anchors)
        object.__setattr__(self, "u1", u1)
        object.__setattr__(self, "u2", u2)
        object.__setattr__(self, "b1", float(self.b1))
        object.__setattr__(self, "b2", float(self.b2))
        object.__setattr__(self, "gram_anchors", G)

    @property
    def n_features(self) -> int:
        return self.anchors.shape[1]

    def w_norms(self) -> tuple[float, float]:
        G = self.gram_anchors
        return (
            float(np.sqrt(max(self.u1 @ G @ self.u1, 0.0))),
            float(np.sqrt(max(self.u2 @ G @ self.u2, 0.0))),
        )

    def decision(self, X) -> tuple[np.ndarray, np.ndarray]:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        K = gram(X, self.anchors, self.spec)
        return K @ self.u1 + self.b1, K @ self.u2 + self.b2

    def plane_distances(self, X) -> tuple[np.ndarray, np.ndarray]:
        f1, f2 = self.decision(X)
        n1, n2 = self.w_norms()
        return _distance(f1, n1, self.b1), _distance(f2, n2, self.b2)

    def predict(self, X) -> np.ndarray:
        return _nearest_plane(*self.plane_distances(X))

    def scaled(self, g1: float, g2: float) -> "KernelPlanePair":
        return KernelPlanePair(
            g1 * self.u1, g1 * self.b1, g2 * self.u2, g2 * self.b2, self.anchors, self.spec, self.gram_anchors
        )

    def to_dict(self) -> dict:
        return {
            "type": "kernel",
            "u1": self.u1.tolist(),
            "b1": self.b1,
            "u2": self.u2.tolist(),
            "b2": self.b2,
            "anchors": self.anchors.tolist(),
            "kernel": self.spec.to_dict(),
        }


Planes = Union[PlanePair, KernelPlanePair]


def classify(p: Planes, x) -> int:
    """Label of a single sample: +1 if it is no farther from plane 1 than from plane 2."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return int(p.predict(x)[0])


def planes_from_dict(d: dict) -> Planes:
    if d["type"] == "linear":
        return PlanePair(np.asarray(d["w1"]), d["b1"], np.asarray(d["w2"]), d["b2"])
    spec = KernelSpec(d["kernel"]["kind"], d["kernel"]["sigma"])
    return KernelPlanePair(np.asarray(d["u1"]), d["b1"], np.asarray(d["u2"]), d["b2"], np.asarray(d["anchors"]), spec)


# ---------------------------------------------------------------------------
# Closed-form trainers
# ---------------------------------------------------------------------------


def _augment(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _check_c(**cs) -> None:
    for name, c in cs.items():
        if not c > 0:
            raise ValueError(f"{name} must be positive, got {c}")


def _twin_closed_form(E, F, r_pos, r_neg, c1, c2, ridge):
    """Shared solve for both least-squares twin systems.

    ``E``/``F`` are the augmented +1/-1 design matrices and ``r_pos``/``r_neg``
    the right-hand offsets (1 + radius per row).
    """
    EtE = E.T @ E
    FtF = F.T @ F
    z1 = -solve_spd(FtF + EtE / c1, F.T @ r_neg, ridge)
    z2 = solve_spd(EtE + FtF / c2, E.T @ r_pos, ridge)
    return z1, z2


def fit_lstsvm(A, B, c1: float = 1.0, c2: float = 1.0, ridge: float = 1e-8) -> PlanePair:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[0] < 1 or B.shape[0] < 1:
        raise ValueError("both classes need at least one sample")
    _check_c(c1=c1, c2=c2)
    E, F = _augment(A), _augment(B)
    z1, z2 = _twin_closed_form(E, F, np.ones(A.shape[0]), np.ones(B.shape[0]), c1, c2, ridge)
    return PlanePair(z1[:-1], z1[-1], z2[:-1], z2[-1])


def _require_both_classes(bs: BallSet) -> None:
    if bs.k1 < 1 or bs.k2 < 1:
        raise ValueError(f"need balls of both classes, got k1={bs.k1}, k2={bs.k2}")


def fit_gblstsvm_linear(bs: BallSet, c1: float = 1.0, c2: float = 1.0, ridge: float = 1e-8) -> PlanePair:
    _require_both_classes(bs)
    _check_c(c1=c1, c2=c2)
    E, F = _augment(bs.C), _augment(bs.D)
    z1, z2 = _twin_closed_form(E, F, 1.0 + bs.R_plus, 1.0 + bs.R_minus, c1, c2, ridge)
    return PlanePair(z1[:-1], z1[-1], z2[:-1], z2[-1])


def fit_gblstsvm_kernel(
    bs: BallSet, c1: float = 1.0, c2: float = 1.0, spec: KernelSpec = KernelSpec(), ridge: float = 1e-8
) -> KernelPlanePair:
    """Rectangular-kernel GBLSTSVM over the anchor set of all ball centres.

    Ball radii enter as the input-space radii.
    """
    _require_both_classes(bs)
    _check_c(c1=c1, c2=c2)
    O = np.vstack([bs.C, bs.D])
    K = gram(O, O, spec)
    G, H = _augment(K[: bs.k1]), _augment(K[bs.k1 :])
    z1, z2 = _twin_closed_form(G, H, 1.0 + bs.R_plus, 1.0 + bs.R_minus, c1, c2, ridge)
    return KernelPlanePair(z1[:-1], z1[-1], z2[:-1], z2[-1], O, spec, K)


# ---------------------------------------------------------------------------
# Dual (inversion-free) trainers
# ---------------------------------------------------------------------------


def lsgblstsvm_duals(bs: BallSet, c1, c2, c3, c4, spec: Optional[KernelSpec] = None):
    """Explicit dual problems ``(Q1, q1), (Q2, q2)`` as minimisation of 0.5 z'Qz + q'z.

    Variables are ordered (alpha over C, beta over D) for plane 1 and
    (lambda over D, theta over C) for plane 2.
    """
    return _duals(bs, c1, c2, c3, c4, spec or KernelSpec.linear())[:2]


def _duals(bs: BallSet, c1, c2, c3, c4, spec: KernelSpec):
    k1, k2 = bs.k1, bs.k2
    O = np.vstack([bs.C, bs.D])
    K = gram(O, O, spec)
    Q1 = K + 1.0
    Q1[np.arange(k1), np.arange(k1)] += c3
    Q1[np.arange(k1, k1 + k2), np.arange(k1, k1 + k2)] += c3 / c1
    q1 = np.r_[np.zeros(k1), c3 * (1.0 + bs.R_minus)]

    perm = np.r_[np.arange(k1, k1 + k2), np.arange(k1)]
    Q2 = K[np.ix_(perm, perm)] + 1.0
    Q2[np.arange(k2), np.arange(k2)] += c4
    Q2[np.arange(k2, k1 + k2), np.arange(k2, k1 + k2)] += c4 / c2
    q2 = np.r_[np.zeros(k2), c4 * (1.0 + bs.R_plus)]
    return (Q1, q1), (Q2, q2), K


def _warn_unconverged(r1, r2) -> None:
    if not (r1.converged and r2.converged):
        warnings.warn(
            f"dual coordinate ascent stopped before tolerance (gradient norms {r1.grad_norm:.3g}, {r2.grad_norm:.3g})",
            ConvergenceWarning,
            stacklevel=3,
        )


def fit_lsgblstsvm_linear(
    bs: BallSet,
    c1: float = 1.0,
    c2: float = 1.0,
    c3: float = 1.0,
    c4: float = 1.0,
    cfg: SolverConfig = SolverConfig(),
    dense: bool = False,
) -> PlanePair:
    """Linear LS-GBLSTSVM via cyclic coordinate ascent on both duals.

    The dual Hessians are ``[C 1; D 1][C 1; D 1]' + diag``, so by default the
    solver works on that factor directly; ``dense=True`` builds the k x k
    matrices instead (same iterates, more memory).
    """
    _require_both_classes(bs)
    _check_c(c1=c1, c2=c2, c3=c3, c4=c4)
    k1, k2 = bs.k1, bs.k2
    E, F = _augment(bs.C), _augment(bs.D)
    if dense:
        (Q1, q1), (Q2, q2) = lsgblstsvm_duals(bs, c1, c2, c3, c4)
        r1 = qp_coordinate_ascent(Q1, q1, cfg)
        r2 = qp_coordinate_ascent(Q2, q2, cfg)
    else:
        Z1 = np.vstack([E, F])
        d1 = np.r_[np.full(k1, c3), np.full(k2, c3 / c1)]
        q1 = np.r_[np.zeros(k1), c3 * (1.0 + bs.R_minus)]
        Z2 = np.vstack([F, E])
        d2 = np.r_[np.full(k2, c4), np.full(k1, c4 / c2)]
        q2 = np.r_[np.zeros(k2), c4 * (1.0 + bs.R_plus)]
        r1 = qp_coordinate_ascent_factored(Z1, d1, q1, cfg)
        r2 = qp_coordinate_ascent_factored(Z2, d2, q2, cfg)
    _warn_unconverged(r1, r2)
    alpha, beta = r1.z[:k1], r1.z[k1:]
    lam, theta = r2.z[:k2], r2.z[k2:]
    z1 = (E.T @ alpha + F.T @ beta) / c3
    z2 = -(F.T @ lam + E.T @ theta) / c4
    dual = DualSolution(alpha, beta, lam, theta, r1.converged and r2.converged, (r1.sweeps, r2.sweeps))
    return PlanePair(z1[:-1], z1[-1], z2[:-1], z2[-1], dual)


def fit_lsgblstsvm_kernel(
    bs: BallSet,
    c1: float = 1.0,
    c2: float = 1.0,
    c3: float = 1.0,
    c4: float = 1.0,
    spec: KernelSpec = KernelSpec(),
    cfg: SolverConfig = SolverConfig(),
) -> KernelPlanePair:
    _require_both_classes(bs)
    _check_c(c1=c1, c2=c2, c3=c3, c4=c4)
    k1 = bs.k1
    (Q1, q1), (Q2, q2), K = _duals(bs, c1, c2, c3, c4, spec)
    r1 = qp_coordinate_ascent(Q1, q1, cfg)
    r2 = qp_coordinate_ascent(Q2, q2, cfg)
    _warn_unconverged(r1, r2)
    alpha, beta = r1.z[:k1], r1.z[k1:]
    k2 = bs.k2
    lam, theta = r2.z[:k2], r2.z[k2:]
    u1 = np.r_[alpha, beta] / c3
    b1 = (alpha.sum() + beta.sum()) / c3
    u2 = -np.r_[theta, lam] / c4
    b2 = -(lam.sum() + theta.sum()) / c4
    dual = DualSolution(alpha, beta, lam, theta, r1.converged and r2.converged, (r1.sweeps, r2.sweeps))
    return KernelPlanePair(u1, b1, u2, b2, np.vstack([bs.C, bs.D]), spec, K, dual)


# ---------------------------------------------------------------------------
# End-to-end training
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainedModel:
    variant: str
    spec: KernelSpec
    planes: Planes
    hp: HyperParams
    n_balls: int
    norm: Optional[NormParams] = None

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.norm is not None:
            X = self.norm.apply(np.atleast_2d(X))
        return self.planes.predict(X)

    def to_dict(self) -> dict:
        return {
            "format": "gblstsvm-model/1",
            "variant": self.variant,
            "kernel": self.spec.to_dict(),
            "hyperparams": self.hp.to_dict(),
            "n_balls": self.n_balls,
            "normalization": None if self.norm is None else self.norm.to_dict(),
            "planes": self.planes.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        if d.get("format") != "gblstsvm-model/1":
            raise ValueError(f"unrecognised model format {d.get('format')!r}")
        norm = None if d.get("normalization") is None else NormParams.from_dict(d["normalization"])
        return cls(
            d["variant"],
            KernelSpec(d["kernel"]["kind"], d["kernel"]["sigma"]),
            planes_from_dict(d["planes"]),
            HyperParams(**d["hyperparams"]),
            int(d["n_balls"]),
            norm,
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "TrainedModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def fit_ballset(bs: BallSet, hp: HyperParams, variant: str, spec: KernelSpec, cfg: SolverConfig = SolverConfig()) -> Planes:
    """Dispatch a ball-based fit (``lstsvm`` here means all-singleton balls)."""
    if variant in ("lstsvm", "gblstsvm"):
        if spec.kind == "linear":
            return fit_gblstsvm_linear(bs, hp.c1, hp.c2, cfg.ridge)
        return fit_gblstsvm_kernel(bs, hp.c1, hp.c2, spec, cfg.ridge)
    if variant == "lsgblstsvm":
        if spec.kind == "linear":
            return fit_lsgblstsvm_linear(bs, hp.c1, hp.c2, hp.c3, hp.c4, cfg)
        return fit_lsgblstsvm_kernel(bs, hp.c1, hp.c2, hp.c3, hp.c4, spec, cfg)
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def train_pipeline(
    d: Dataset,
    hp: HyperParams = HyperParams(),
    variant: str = "gblstsvm",
    spec: KernelSpec = KernelSpec(),
    seed: int = 0,
    cfg: SolverConfig = SolverConfig(),
) -> TrainedModel:
    """Granulate (ball variants), fit, and wrap the result as a predictor."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if np.all(d.labels == 1) or np.all(d.labels == -1):
        raise ValueError("training data contains a single class")
    if spec.kind == "gaussian" and spec.sigma != hp.sigma:
        spec = KernelSpec.gaussian(hp.sigma)
    if variant == "lstsvm":
        if spec.kind == "linear":
            A, B = d.class_split()
            planes = fit_lstsvm(A, B, hp.c1, hp.c2, cfg.ridge)
        else:
            planes = fit_gblstsvm_kernel(BallSet.singletons(d), hp.c1, hp.c2, spec, cfg.ridge)
        return TrainedModel(variant, spec, planes, hp, d.m)
    bs = generate_balls(d, hp.pur, hp.num, seed)
    return TrainedModel(variant, spec, fit_ballset(bs, hp, variant, spec, cfg), hp, bs.k)
