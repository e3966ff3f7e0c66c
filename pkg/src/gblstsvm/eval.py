"""Cross-validated grid search and multi-dataset comparison statistics."""

from __future__ import annotations

import csv
import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats as _st

from .dataset import Dataset
from .granular import generate_balls
from .kernel import KernelSpec
from .models import VARIANTS, ConvergenceWarning, HyperParams, fit_ballset, train_pipeline
from .solver import SolverConfig, SolverError

__all__ = [
    "HyperParams",
    "accuracy",
    "Grid",
    "full_grid",
    "quick_grid",
    "GridSearchResult",
    "kfold_indices",
    "kfold_grid_search",
    "AccuracyTable",
    "StatsError",
    "average_ranks",
    "rank_matrix",
    "FriedmanResult",
    "friedman",
    "WilcoxonResult",
    "wilcoxon_signed_rank",
    "WinTieLoss",
    "win_tie_loss",
]

_TIE_DECIMALS = 10


def accuracy(predicted, actual) -> float:
    p = np.asarray(predicted).reshape(-1)
    a = np.asarray(actual).reshape(-1)
    if p.shape != a.shape:
        raise ValueError(f"length mismatch: {p.size} predictions for {a.size} labels")
    if a.size == 0:
        raise ValueError("accuracy of an empty label set is undefined")
    return float(np.count_nonzero(p == a)) / a.size


# ---------------------------------------------------------------------------
# Grid search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Candidate values per hyperparameter; unused axes are ignored per variant."""

    c: tuple = tuple(10.0**e for e in range(-5, 6))
    sigma: tuple = tuple(2.0**e for e in range(-5, 6))
    pur: tuple = (0.925, 0.94, 0.955, 0.97, 0.985)
    num: tuple = (2, 3, 4)
    tie: bool = True

    def points(self, variant: str, kernel: str) -> list[HyperParams]:
        """Enumerate in a fixed order; earlier points win ties."""
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        c1s = self.c
        c2s = (None,) if self.tie else self.c
        if variant == "lsgblstsvm":
            c3s = self.c
            c4s = (None,) if self.tie else self.c
        else:
            c3s = c4s = (1.0,)
        sigmas = self.sigma if kernel == "gaussian" else (1.0,)
        ball = variant != "lstsvm"
        purs = self.pur if ball else (0.95,)
        nums = self.num if ball else (2,)
        out = []
        for c1, c2, c3, c4, s, p, n in itertools.product(c1s, c2s, c3s, c4s, sigmas, purs, nums):
            out.append(
                HyperParams(
                    c1=c1, c2=c1 if c2 is None else c2, c3=c3, c4=c3 if c4 is None else c4, sigma=s, pur=p, num=int(n)
                )
            )
        return out


def full_grid(tie: bool = True) -> Grid:
    return Grid(tie=tie)


def quick_grid(tie: bool = True) -> Grid:
    """A coarse grid for desk-scale runs."""
    return Grid(
        c=(1e-3, 1e-1, 1.0, 10.0, 1e3),
        sigma=(0.25, 1.0, 4.0),
        pur=(0.94, 0.97),
        num=(2,),
        tie=tie,
    )


@dataclass
class GridSearchResult:
    best: HyperParams
    score: float
    points: list = field(repr=False)
    scores: np.ndarray = field(repr=False)
    n_unconverged: int = 0

    def __iter__(self):
        return iter((self.best, self.score))


def kfold_indices(m: int, k: int, seed: int) -> list[np.ndarray]:
    if k < 2:
        raise ValueError("need at least 2 folds")
    if m < k:
        raise ValueError(f"cannot make {k} folds from {m} samples")
    perm = np.random.default_rng(seed).permutation(m)
    return [np.sort(f) for f in np.array_split(perm, k)]


def derived_seed(seed: int, *key) -> int:
    """Seed that depends only on (seed, key), never on execution order."""
    return int(np.random.SeedSequence([int(seed), *[int(x) for x in key]]).generate_state(1)[0])


def kfold_grid_search(
    d: Dataset,
    grid: Optional[Grid] = None,
    k: int = 5,
    variant: str = "gblstsvm",
    kernel: str = "linear",
    seed: int = 0,
    workers: int = 1,
    cfg: SolverConfig = SolverConfig(),
    points: Optional[Sequence[HyperParams]] = None,
) -> GridSearchResult:
    """Exhaustive k-fold search; returns the first point with the best mean accuracy.

    Folds whose training part holds a single class are skipped. Ball sets are
    built once per (fold, pur, num) from a seed derived from those keys, so
    results do not depend on ``workers``.
    """
    grid = grid or quick_grid()
    pts = list(points) if points is not None else grid.points(variant, kernel)
    if not pts:
        raise ValueError("empty grid")
    folds = kfold_indices(d.m, k, seed)
    all_idx = np.arange(d.m)
    splits = []
    for f, test_idx in enumerate(folds):
        train = d.subset(np.setdiff1d(all_idx, test_idx))
        if np.all(train.labels == 1) or np.all(train.labels == -1):
            continue
        splits.append((f, train, d.subset(test_idx)))
    if not splits:
        raise ValueError("every fold has a single-class training set")

    pur_values = sorted({p.pur for p in pts})
    balls = {}
    if variant != "lstsvm":
        for f, train, _ in splits:
            for pi, pur in enumerate(pur_values):
                for num in sorted({p.num for p in pts if p.pur == pur}):
                    balls[f, pur, num] = generate_balls(train, pur, num, derived_seed(seed, f, pi, num))

    def score(hp: HyperParams):
        spec = KernelSpec.gaussian(hp.sigma) if kernel == "gaussian" else KernelSpec.linear()
        accs, unconverged = [], 0
        for f, train, test in splits:
            try:
                if variant == "lstsvm":
                    model = train_pipeline(train, hp, "lstsvm", spec, cfg=cfg).planes
                else:
                    model = fit_ballset(balls[f, hp.pur, hp.num], hp, variant, spec, cfg)
            except SolverError:
                return math.nan, unconverged
            dual = getattr(model, "dual", None)
            if dual is not None and not dual.converged:
                unconverged += 1
            accs.append(accuracy(model.predict(test.features), test.labels))
        return float(np.mean(accs)), unconverged

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(score, pts))
        else:
            results = [score(p) for p in pts]

    scores = np.array([r[0] for r in results])
    if np.all(np.isnan(scores)):
        raise SolverError("every grid point failed to fit")
    best = int(np.nanargmax(scores))
    return GridSearchResult(pts[best], float(scores[best]), pts, scores, sum(r[1] for r in results))


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class AccuracyTable:
    models: tuple
    datasets: tuple
    acc: np.ndarray  # datasets x models, fractions in [0, 1]

    def __post_init__(self):
        acc = np.atleast_2d(np.asarray(self.acc, dtype=np.float64))
        models, datasets = tuple(self.models), tuple(self.datasets)
        if acc.shape != (len(datasets), len(models)):
            raise StatsError(f"accuracy matrix is {acc.shape}, expected {(len(datasets), len(models))}")
        if not np.all(np.isfinite(acc)):
            raise StatsError("accuracy table has missing entries")
        if acc.min() < 0 or acc.max() > 1:
            raise StatsError("accuracies must lie in [0, 1]")
        acc.setflags(write=False)
        object.__setattr__(self, "acc", acc)
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "datasets", datasets)

    @property
    def M(self) -> int:
        return len(self.datasets)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.models)

    def column(self, model: str) -> np.ndarray:
        try:
            return self.acc[:, self.models.index(model)]
        except ValueError:
            raise KeyError(f"no model {model!r} in table (have {', '.join(self.models)})") from None

    @classmethod
    def from_csv(cls, path, percent: Optional[bool] = None) -> "AccuracyTable":
        """Read ``dataset,<model>,...`` rows. Percent tables (any value > 1) are rescaled."""
        with Path(path).open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
        if len(rows) < 2:
            raise StatsError(f"{path}: need a header and at least one dataset row")
        header = [h.strip() for h in rows[0]]
        models = header[1:]
        if not models:
            raise StatsError(f"{path}: no model columns")
        names, vals = [], []
        for ln, r in enumerate(rows[1:], start=2):
            if len(r) != len(header):
                raise StatsError(f"{path}:{ln}: expected {len(header)} fields, got {len(r)}")
            names.append(r[0].strip())
            try:
                vals.append([float(v) for v in r[1:]])
            except ValueError as exc:
                raise StatsError(f"{path}:{ln}: {exc}") from None
        acc = np.array(vals)
        if percent is None:
            percent = bool(np.nanmax(acc) > 1.0)
        if percent:
            acc = acc / 100.0
        return cls(tuple(models), tuple(names), acc)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["dataset", *self.models])
            for name, row in zip(self.datasets, self.acc):
                w.writerow([name, *(f"{v:.6f}" for v in row)])


def rank_matrix(t: AccuracyTable) -> np.ndarray:
    """Per-dataset ranks, 1 = most accurate, midranks for ties."""
    a = np.round(t.acc, _TIE_DECIMALS)
    return _st.rankdata(-a, method="average", axis=1)


def average_ranks(t: AccuracyTable) -> np.ndarray:
    return rank_matrix(t).mean(axis=0)


@dataclass(frozen=True)
class FriedmanResult:
    chi2: float
    ff: float
    critical: float
    reject: bool


def friedman(ranks, M: int, critical: Optional[float] = None, alpha: float = 0.05) -> FriedmanResult:
    """Friedman chi-square on average ranks and its F-distributed correction.

    ``critical`` defaults to the upper ``alpha`` quantile of F(l-1, (l-1)(M-1)).
    """
    R = np.asarray(ranks, dtype=np.float64).reshape(-1)
    l = R.size  # noqa: E741
    if l < 2:
        raise StatsError("Friedman test needs at least two models")
    if M < 2:
        raise StatsError("Friedman test needs at least two datasets")
    chi2 = 12.0 * M / (l * (l + 1)) * (float(np.sum(R**2)) - l * (l + 1) ** 2 / 4.0)
    denom = M * (l - 1) - chi2
    if abs(denom) <= 1e-12 * M * l:
        raise StatsError(f"F_F undefined: chi2 = {chi2:g} equals M(l-1)")
    ff = (M - 1) * chi2 / denom
    if critical is None:
        critical = float(_st.f.ppf(1.0 - alpha, l - 1, (l - 1) * (M - 1)))
    return FriedmanResult(chi2, ff, float(critical), bool(ff > critical))


@dataclass(frozen=True)
class WilcoxonResult:
    r_plus: float
    r_minus: float
    p: float
    n: int


def wilcoxon_signed_rank(acc_a, acc_b) -> WilcoxonResult:
    """Signed-rank test on ``acc_a - acc_b``; ``r_plus`` sums ranks where a wins.

    Two-sided p from the normal approximation with tie and continuity corrections.
    """
    a = np.asarray(acc_a, dtype=np.float64).reshape(-1)
    b = np.asarray(acc_b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError("accuracy vectors differ in length")
    d = np.round(a - b, _TIE_DECIMALS)
    d = d[d != 0]
    n = d.size
    if n == 0:
        return WilcoxonResult(0.0, 0.0, 1.0, 0)
    r = _st.rankdata(np.abs(d), method="average")
    r_plus = float(r[d > 0].sum())
    r_minus = float(r[d < 0].sum())
    _, counts = np.unique(np.abs(d), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(counts**3 - counts)) / 48.0
    mean = n * (n + 1) / 4.0
    if var <= 0:
        return WilcoxonResult(r_plus, r_minus, 1.0, n)
    dev = abs(min(r_plus, r_minus) - mean) - 0.5
    z = max(dev, 0.0) / math.sqrt(var)
    p = float(min(1.0, 2.0 * _st.norm.sf(z)))
    return WilcoxonResult(r_plus, r_minus, p, n)


@dataclass(frozen=True)
class WinTieLoss:
    wins: int
    ties: int
    losses: int
    threshold: float
    raw_wins: int
    raw_losses: int

    @property
    def significant(self) -> bool:
        return self.wins >= self.threshold


def win_tie_loss(acc_a, acc_b) -> WinTieLoss:
    """Count a's wins over b with ties shared evenly (an odd tie count drops one first)."""
    a = np.asarray(acc_a, dtype=np.float64).reshape(-1)
    b = np.asarray(acc_b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError("accuracy vectors differ in length")
    d = np.round(a - b, _TIE_DECIMALS)
    w, l, t = int(np.sum(d > 0)), int(np.sum(d < 0)), int(np.sum(d == 0))  # noqa: E741
    half = t // 2
    M = a.size
    threshold = M / 2.0 + 1.96 * math.sqrt(M) / 2.0
    return WinTieLoss(w + half, t, l + half, threshold, w, l)
