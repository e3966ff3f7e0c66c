"""Hot numeric kernels, each in a numba-compiled and a pure-numpy flavour.

The public dispatchers at the bottom pick one according to
:data:`gblstsvm._accel.USE_NUMBA`. Both flavours perform the same arithmetic
in the same order, so results agree to round-off.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# Cyclic coordinate minimisation of 0.5 z'Qz + b'z, dense Q.
# ---------------------------------------------------------------------------


@njit
def _cd_dense_jit(Q, b, z, tol, max_sweeps):
    n = Q.shape[0]
    g = Q @ z + b
    history = np.empty(max_sweeps + 1)
    history[0] = 0.5 * np.dot(z, g + b)
    sweeps = 0
    gmax = np.max(np.abs(g)) if n > 0 else 0.0
    while sweeps < max_sweeps and gmax > tol:
        for i in range(n):
            gi = g[i]
            if gi == 0.0:
                continue
            delta = -gi / Q[i, i]
            z[i] += delta
            for j in range(n):
                g[j] += delta * Q[j, i]
        sweeps += 1
        # refresh to keep incremental drift out of the stopping test
        g = Q @ z + b
        history[sweeps] = 0.5 * np.dot(z, g + b)
        gmax = np.max(np.abs(g))
    return z, g, sweeps, history[: sweeps + 1]


def _cd_dense_numpy(Q, b, z, tol, max_sweeps):
    n = Q.shape[0]
    g = Q @ z + b
    history = [0.5 * float(z @ (g + b))]
    sweeps = 0
    gmax = np.max(np.abs(g)) if n else 0.0
    while sweeps < max_sweeps and gmax > tol:
        for i in range(n):
            gi = g[i]
            if gi == 0.0:
                continue
            delta = -gi / Q[i, i]
            z[i] += delta
            g += delta * Q[:, i]
        sweeps += 1
        g = Q @ z + b
        history.append(0.5 * float(z @ (g + b)))
        gmax = np.max(np.abs(g))
    return z, g, sweeps, np.asarray(history)


# ---------------------------------------------------------------------------
# Same iteration for Q = Z Z' + diag(d), never forming Q.
# v = Z'z is carried along so each coordinate step costs O(cols(Z)).
# ---------------------------------------------------------------------------


@njit
def _cd_factored_jit(Z, d, b, z, tol, max_sweeps):
    n, p = Z.shape
    diag = np.empty(n)
    for i in range(n):
        s = 0.0
        for j in range(p):
            s += Z[i, j] * Z[i, j]
        diag[i] = s + d[i]
    v = Z.T @ z
    g = Z @ v + d * z + b
    history = np.empty(max_sweeps + 1)
    history[0] = 0.5 * np.dot(z, g + b)
    sweeps = 0
    gmax = np.max(np.abs(g)) if n > 0 else 0.0
    while sweeps < max_sweeps and gmax > tol:
        for i in range(n):
            gi = d[i] * z[i] + b[i]
            for j in range(p):
                gi += Z[i, j] * v[j]
            if gi == 0.0:
                continue
            delta = -gi / diag[i]
            z[i] += delta
            for j in range(p):
                v[j] += delta * Z[i, j]
        sweeps += 1
        v = Z.T @ z
        g = Z @ v + d * z + b
        history[sweeps] = 0.5 * np.dot(z, g + b)
        gmax = np.max(np.abs(g))
    return z, g, sweeps, history[: sweeps + 1]


def _cd_factored_numpy(Z, d, b, z, tol, max_sweeps):
    n = Z.shape[0]
    diag = np.einsum("ij,ij->i", Z, Z) + d
    v = Z.T @ z
    g = Z @ v + d * z + b
    history = [0.5 * float(z @ (g + b))]
    sweeps = 0
    gmax = np.max(np.abs(g)) if n else 0.0
    while sweeps < max_sweeps and gmax > tol:
        for i in range(n):
            gi = d[i] * z[i] + b[i] + Z[i] @ v
            if gi == 0.0:
                continue
            delta = -gi / diag[i]
            z[i] += delta
            v += delta * Z[i]
        sweeps += 1
        v = Z.T @ z
        g = Z @ v + d * z + b
        history.append(0.5 * float(z @ (g + b)))
        gmax = np.max(np.abs(g))
    return z, g, sweeps, np.asarray(history)


# ---------------------------------------------------------------------------
# Lloyd iterations for k = 2. Returns a boolean mask: True -> cluster 1.
# A point equidistant from both centroids goes to cluster 0.
# ---------------------------------------------------------------------------


@njit
def _two_means_jit(X, c0, c1, max_iter):
    m, n = X.shape
    assign = np.zeros(m, dtype=np.bool_)
    s0 = np.empty(n)
    s1 = np.empty(n)
    for it in range(max_iter):
        changed = False
        s0[:] = 0.0
        s1[:] = 0.0
        n0 = 0
        n1 = 0
        for i in range(m):
            d0 = 0.0
            d1 = 0.0
            for j in range(n):
                t0 = X[i, j] - c0[j]
                t1 = X[i, j] - c1[j]
                d0 += t0 * t0
                d1 += t1 * t1
            a = d1 < d0
            if a != assign[i]:
                changed = True
                assign[i] = a
            if a:
                n1 += 1
                for j in range(n):
                    s1[j] += X[i, j]
            else:
                n0 += 1
                for j in range(n):
                    s0[j] += X[i, j]
        if it > 0 and not changed:
            break
        if n0 == 0 or n1 == 0:
            break
        for j in range(n):
            c0[j] = s0[j] / n0
            c1[j] = s1[j] / n1
    return assign


def _two_means_numpy(X, c0, c1, max_iter):
    assign = np.zeros(X.shape[0], dtype=bool)
    for it in range(max_iter):
        d0 = ((X - c0) ** 2).sum(axis=1)
        d1 = ((X - c1) ** 2).sum(axis=1)
        new = d1 < d0
        changed = bool(np.any(new != assign))
        assign = new
        if it > 0 and not changed:
            break
        n1 = int(assign.sum())
        n0 = assign.size - n1
        if n0 == 0 or n1 == 0:
            break
        c0 = X[~assign].mean(axis=0)
        c1 = X[assign].mean(axis=0)
    return assign


# ---------------------------------------------------------------------------
# Row of X farthest from p (first one on ties) and its squared distance.
# ---------------------------------------------------------------------------


@njit
def _farthest_jit(X, p):
    m, n = X.shape
    best = 0
    best_d = -1.0
    for i in range(m):
        d = 0.0
        for j in range(n):
            t = X[i, j] - p[j]
            d += t * t
        if d > best_d:
            best_d = d
            best = i
    return best, best_d


def _farthest_numpy(X, p):
    d = ((X - p) ** 2).sum(axis=1)
    i = int(np.argmax(d))
    return i, float(d[i])


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

if USE_NUMBA:
    cd_dense = _cd_dense_jit
    cd_factored = _cd_factored_jit
    two_means = _two_means_jit
    farthest = _farthest_jit
else:
    cd_dense = _cd_dense_numpy
    cd_factored = _cd_factored_numpy
    two_means = _two_means_numpy
    farthest = _farthest_numpy

IMPLEMENTATIONS = {
    "cd_dense": (_cd_dense_jit, _cd_dense_numpy),
    "cd_factored": (_cd_factored_jit, _cd_factored_numpy),
    "two_means": (_two_means_jit, _two_means_numpy),
    "farthest": (_farthest_jit, _farthest_numpy),
}
