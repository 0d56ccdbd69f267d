"""Independent oracles used across the test suite.

These deliberately avoid the code paths they check: the objective
minimizer is a stacked least-squares solve, the Sylvester oracle is a
dense Kronecker system, and the metric oracles are direct loops.
"""

import math

import numpy as np


def random_instance(seed, m=10, n=6, t=4, x_density=0.4, d_density=0.5):
    """Random binary interaction and decoder matrices without empty
    columns/rows."""
    r = np.random.default_rng(seed)
    x = (r.random((m, n)) < x_density).astype(float)
    x[:, x.sum(axis=0) == 0] = 1.0
    d = (r.random((n, t)) < d_density).astype(float)
    d[d.sum(axis=1) == 0, 0] = 1.0
    return x, d


def exact_minimizer(x, d, lam1, lam2):
    """Exact minimizer of the diagonal-suppressed training objective.

    The loss is a convex quadratic in vec(E); build the stacked linear
    least-squares system column by column and solve it directly.
    """
    m, n = x.shape
    t = d.shape[1]
    nt = n * t
    a = np.zeros((m * n + n * n + nt, nt))
    b = np.zeros(m * n + n * n + nt)
    for j in range(nt):
        e = np.zeros(nt)
        e[j] = 1.0
        mat = e.reshape(n, t) @ d.T
        mat = mat - np.diag(np.diag(mat))
        a[: m * n, j] = (x @ mat).ravel()
        a[m * n : m * n + n * n, j] = math.sqrt(lam1) * mat.ravel()
        a[m * n + n * n :, j] = math.sqrt(lam2) * e
    b[: m * n] = x.ravel()
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    return sol.reshape(n, t)


def sylvester_dense_solve(a, b, lam2, rhs):
    """Solve A E B + lam2 E = RHS by the vectorized Kronecker system."""
    n, t = rhs.shape
    k = np.kron(b.T, a) + lam2 * np.eye(n * t)
    vec = np.linalg.solve(k, rhs.flatten(order="F"))
    return vec.reshape((n, t), order="F")


def brute_recall(topk, truth, k):
    hits = 0
    for item in list(topk)[:k]:
        if item in truth:
            hits += 1
    return hits / min(k, len(truth))


def brute_ndcg(topk, truth, k):
    dcg = 0.0
    for rank, item in enumerate(list(topk)[:k], start=1):
        if item in truth:
            dcg += 1.0 / math.log2(rank + 1)
    idcg = sum(1.0 / math.log2(rank + 1) for rank in range(1, min(k, len(truth)) + 1))
    return dcg / idcg


def naive_gram(dense):
    """Triple-loop M^T M."""
    rows, cols = dense.shape
    out = np.zeros((cols, cols))
    for i in range(cols):
        for j in range(cols):
            for r in range(rows):
                out[i, j] += dense[r, i] * dense[r, j]
    return out
