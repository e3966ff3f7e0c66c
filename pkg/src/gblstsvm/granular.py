"""Granular-ball covering of a labelled training set.

Balls are grown top-down: the whole set starts as one ball and any ball
whose purity is below the threshold is split in two by 2-means, until every
ball is pure enough or a singleton.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .dataset import Dataset


@dataclass(frozen=True)
class GranularBall:
    center: np.ndarray
    radius: float
    label: int
    size: int
    purity: float
    member_indices: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class BallSet:
    """Class-partitioned ball centres and radii.

    ``C``/``R_plus`` hold the +1 balls and ``D``/``R_minus`` the -1 balls, each
    in the order the balls appear in ``balls``.
    """

    C: np.ndarray
    D: np.ndarray
    R_plus: np.ndarray
    R_minus: np.ndarray
    balls: tuple = ()

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=np.float64))
        D = np.atleast_2d(np.asarray(self.D, dtype=np.float64))
        rp = np.asarray(self.R_plus, dtype=np.float64).reshape(-1)
        rm = np.asarray(self.R_minus, dtype=np.float64).reshape(-1)
        if C.shape[0] != rp.shape[0] or D.shape[0] != rm.shape[0]:
            raise ValueError("radii must have one entry per centre")
        if C.size and D.size and C.shape[1] != D.shape[1]:
            raise ValueError("C and D must have the same number of columns")
        for name, a in (("C", C), ("D", D), ("R_plus", rp), ("R_minus", rm)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "balls", tuple(self.balls))

    @property
    def k1(self) -> int:
        return self.C.shape[0]

    @property
    def k2(self) -> int:
        return self.D.shape[0]

    @property
    def k(self) -> int:
        return self.k1 + self.k2

    @classmethod
    def from_balls(cls, balls: Sequence[GranularBall], n_features: int) -> "BallSet":
        pos = [b for b in balls if b.label == 1]
        neg = [b for b in balls if b.label == -1]

        def stack(group):
            if not group:
                return np.empty((0, n_features))
            return np.vstack([b.center for b in group])

        return cls(
            stack(pos),
            stack(neg),
            np.array([b.radius for b in pos], dtype=np.float64),
            np.array([b.radius for b in neg], dtype=np.float64),
            tuple(balls),
        )

    @classmethod
    def singletons(cls, d: Dataset) -> "BallSet":
        """Every sample its own zero-radius ball."""
        balls = [
            GranularBall(d.features[i].copy(), 0.0, int(d.labels[i]), 1, 1.0, np.array([i]))
            for i in range(d.m)
        ]
        return cls.from_balls(balls, d.n_features)

    def flipped(self) -> "BallSet":
        """The same balls with class roles exchanged."""
        balls = tuple(
            GranularBall(b.center, b.radius, -b.label, b.size, b.purity, b.member_indices)
            for b in self.balls
        )
        return BallSet(self.D, self.C, self.R_minus, self.R_plus, balls)

    def to_csv(self, path) -> None:
        """One row per ball: centre coordinates, radius, label, size."""
        n = self.C.shape[1] if self.k1 else self.D.shape[1]
        rows = self.balls
        if not rows:
            rows = [GranularBall(c, r, 1, 0, 1.0, np.empty(0, int)) for c, r in zip(self.C, self.R_plus)]
            rows += [GranularBall(c, r, -1, 0, 1.0, np.empty(0, int)) for c, r in zip(self.D, self.R_minus)]
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"c{j}" for j in range(n)] + ["radius", "label", "size"])
            for b in rows:
                w.writerow([repr(float(v)) for v in b.center] + [repr(float(b.radius)), b.label, b.size])


def purity(labels) -> float:
    """Fraction of the majority label."""
    y = np.asarray(labels)
    if y.size == 0:
        raise ValueError("purity of an empty label set is undefined")
    pos = int(np.count_nonzero(y == 1))
    return max(pos, y.size - pos) / y.size


def _majority(labels: np.ndarray) -> tuple[int, float]:
    pos = int(np.count_nonzero(labels == 1))
    neg = labels.size - pos
    label = 1 if pos >= neg else -1
    return label, max(pos, neg) / labels.size


def ball_from_members(points, labels, member_indices=None) -> GranularBall:
    """Centre = mean, radius = mean distance to the centre, label = majority (tie -> +1)."""
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    y = np.asarray(labels).reshape(-1)
    if X.shape[0] == 0 or y.size == 0:
        raise ValueError("a ball needs at least one member")
    if y.size != X.shape[0]:
        raise ValueError("points and labels differ in length")
    if np.all(X == X[0]):
        # exact: averaging identical floats can drift by an ulp
        center, radius = X[0].copy(), 0.0
    else:
        center = X.mean(axis=0)
        radius = float(np.sqrt(((X - center) ** 2).sum(axis=1)).mean())
    label, pur = _majority(y)
    if member_indices is None:
        member_indices = np.arange(X.shape[0])
    return GranularBall(center, radius, label, X.shape[0], pur, np.asarray(member_indices))


def _initial_centroids(X: np.ndarray, rng: np.random.Generator, n_starts: int = 3) -> tuple[int, int]:
    """Approximate the farthest pair by two farthest-point hops from a few seeded starts."""
    m = X.shape[0]
    best = (0, 1 if m > 1 else 0)
    best_d = -1.0
    for s in rng.choice(m, size=min(n_starts, m), replace=False):
        a, _ = _kernels.farthest(X, X[s])
        b, dist = _kernels.farthest(X, X[a])
        if dist > best_d:
            best_d = float(dist)
            best = (int(a), int(b))
    return best


def split_two_means(points, seed=0, max_iter: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Partition rows of ``points`` into two non-empty clusters with 2-means.

    ``seed`` may be an int or a ``numpy.random.Generator``. If Lloyd's
    iterations leave a cluster empty, the point farthest from the other
    centroid is moved into it.
    """
    X = np.ascontiguousarray(points, dtype=np.float64)
    m = X.shape[0]
    if m < 2:
        raise ValueError("need at least two points to split")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    a, b = _initial_centroids(X, rng)
    assign = _kernels.two_means(X, X[a].copy(), X[b].copy(), max_iter)
    n1 = int(assign.sum())
    if n1 == 0 or n1 == m:
        side = assign[0]
        c = X[assign == side].mean(axis=0)
        far = int(np.argmax(((X - c) ** 2).sum(axis=1)))
        assign = assign.copy()
        assign[far] = not side
    return np.flatnonzero(~assign), np.flatnonzero(assign)


def generate_balls(d: Dataset, pur: float = 1.0, num: int = 2, seed: int = 0) -> BallSet:
    """Cover ``d`` with granular balls of purity >= ``pur``.

    After the purity pass, balls are split largest-first until there are at
    least ``num`` of them (or nothing is left to split), and further if a
    class present in ``d`` has no ball of its own.
    """
    if not 0.5 < pur <= 1.0:
        raise ValueError(f"purity threshold must lie in (0.5, 1], got {pur}")
    if num < 2:
        raise ValueError(f"num must be >= 2, got {num}")
    X, y = d.features, d.labels
    rng = np.random.default_rng(seed)
    done: list[np.ndarray] = []

    def refine(queue: deque) -> None:
        while queue:
            idx = queue.popleft()
            if idx.size >= 2 and purity(y[idx]) < pur:
                left, right = split_two_means(X[idx], rng)
                queue.append(idx[left])
                queue.append(idx[right])
            else:
                done.append(idx)

    refine(deque([np.arange(d.m)]))

    def split_largest(candidates) -> bool:
        pool = [i for i in candidates if done[i].size >= 2]
        if not pool:
            return False
        j = max(pool, key=lambda i: (done[i].size, -i))
        idx = done.pop(j)
        left, right = split_two_means(X[idx], rng)
        refine(deque([idx[left], idx[right]]))
        return True

    while len(done) < num and split_largest(range(len(done))):
        pass

    for cls in (1, -1):
        if not np.any(y == cls):
            continue
        while not any(_majority(y[idx])[0] == cls for idx in done):
            holders = [i for i, idx in enumerate(done) if np.any(y[idx] == cls)]
            if not split_largest(holders):  # pragma: no cover - singletons always resolve
                break

    balls = [ball_from_members(X[idx], y[idx], idx) for idx in done]
    return BallSet.from_balls(balls, d.n_features)
