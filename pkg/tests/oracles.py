"""Independent reference computations used only by the tests."""

import itertools

import numpy as np
from scipy.optimize import linprog


def lp_transport_cost(dist, a, b=None, allowed_targets=None):
    """Min sum g_ij dist_ij**2 over couplings with row sums ``a``.

    With ``b`` the column sums are fixed too; otherwise the target marginal
    is free but may only charge ``allowed_targets``.
    """
    n = len(a)
    cols = range(n) if allowed_targets is None else list(allowed_targets)
    cols = list(cols)
    cost = (np.asarray(dist) ** 2)[:, cols].ravel()
    k = len(cols)
    A_rows = np.zeros((n, n * k))
    for i in range(n):
        A_rows[i, i * k : (i + 1) * k] = 1.0
    A, rhs = [A_rows], [np.asarray(a, dtype=float)]
    if b is not None:
        A_cols = np.zeros((k, n * k))
        for j in range(k):
            A_cols[j, j::k] = 1.0
        A.append(A_cols)
        rhs.append(np.asarray(b, dtype=float)[cols])
    res = linprog(cost, A_eq=np.vstack(A), b_eq=np.concatenate(rhs), bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return res.fun


def brute_barycentric_cost(dist, mu):
    n = len(mu)
    return [sum(dist[x][y] ** 2 * mu[x] for x in range(n)) for y in range(n)]


def permutation_cost(dist, A, B):
    k = len(A)
    return min(
        sum(dist[A[i]][B[p[i]]] ** 2 for i in range(k)) / k for p in itertools.permutations(range(k))
    )
