"""Exact discrete optimal transport for the squared-distance cost.

The solver is a transportation (network) simplex on the complete bipartite
graph between the supports of the two measures.  It returns the optimal
plan together with dual potentials on all points, so optimality can be
re-checked by :func:`verify_certificate` without trusting the solver.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .space import DEFAULT_TOL_MASS

# consecutive degenerate pivots tolerated before switching to Bland's rule
_DEGENERATE_STREAK = 50


@dataclass(frozen=True)
class TransportPlan:
    """An optimal coupling with its dual certificate.

    ``entries`` lists ``(i, j, mass)`` for every cell with positive mass;
    ``cost`` is the total squared-distance cost.  ``source_scale`` and
    ``target_scale`` record the factors used to renormalize the inputs to
    exactly unit mass before solving.
    """

    entries: tuple
    cost: float
    dual_source: np.ndarray
    dual_target: np.ndarray
    source_scale: float = 1.0
    target_scale: float = 1.0

    def as_matrix(self, n):
        g = np.zeros((n, n))
        for i, j, mass in self.entries:
            g[i, j] += mass
        return g

    def to_dict(self):
        return {
            "entries": [[int(i), int(j), float(w)] for i, j, w in self.entries],
            "cost": float(self.cost),
            "dual_source": [float(x) for x in self.dual_source],
            "dual_target": [float(x) for x in self.dual_target],
        }


def _tree_path(adj, start, goal):
    """Node path from ``start`` to ``goal`` in a spanning tree."""
    parent = {start: None}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        if u == goal:
            break
        for v in adj[u]:
            if v not in parent:
                parent[v] = u
                queue.append(v)
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def _potentials(basis, cost, r, c):
    """Solve u[i] + v[j] = cost[i, j] on the basis tree, with u[0] = 0."""
    adj = [[] for _ in range(r + c)]
    for i, j in basis:
        adj[i].append(r + j)
        adj[r + j].append(i)
    u = np.zeros(r)
    v = np.zeros(c)
    seen = [False] * (r + c)
    seen[0] = True
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for b in adj[a]:
            if seen[b]:
                continue
            seen[b] = True
            if a < r:
                v[b - r] = cost[a, b - r] - u[a]
            else:
                u[b] = cost[b, a - r] - v[a - r]
            queue.append(b)
    return u, v, adj


def _tree_flows(basis, supply, demand, r, c):
    """Recompute basic flows from the marginals by peeling tree leaves."""
    incident = [set() for _ in range(r + c)]
    for k, (i, j) in enumerate(basis):
        incident[i].add(k)
        incident[r + j].add(k)
    rem = np.concatenate([supply, demand]).astype(float)
    flows = np.zeros(len(basis))
    leaves = deque(sorted(a for a in range(r + c) if len(incident[a]) == 1))
    done = 0
    while leaves and done < len(basis):
        a = leaves.popleft()
        if len(incident[a]) != 1:
            continue
        (k,) = incident[a]
        i, j = basis[k]
        other = r + j if a == i else i
        flows[k] = rem[a]
        rem[other] -= rem[a]
        rem[a] = 0.0
        incident[a].clear()
        incident[other].discard(k)
        done += 1
        if len(incident[other]) == 1:
            leaves.append(other)
    return np.maximum(flows, 0.0)


def _northwest_corner(supply, demand):
    r, c = supply.size, demand.size
    s, t = supply.copy(), demand.copy()
    basis, flows = [], []
    i = j = 0
    while True:
        q = min(s[i], t[j])
        basis.append((i, j))
        flows.append(q)
        s[i] -= q
        t[j] -= q
        if i == r - 1 and j == c - 1:
            break
        if j == c - 1 or (i < r - 1 and s[i] <= t[j]):
            i += 1
        else:
            j += 1
    return basis, flows


def _transport_simplex(cost, supply, demand):
    """Optimal basis, flows and potentials for a balanced transportation LP."""
    r, c = cost.shape
    basis, flows = _northwest_corner(supply, demand)
    flow = dict(zip(basis, flows))
    scale = float(cost.max()) if cost.size else 0.0
    tol = 1e-13 * max(scale, 1e-300)
    streak = 0
    max_iter = 50 * (r + c) ** 2 + 100
    for _ in range(max_iter):
        u, v, adj = _potentials(basis, cost, r, c)
        reduced = cost - u[:, None] - v[None, :]
        if streak < _DEGENERATE_STREAK:
            k = int(np.argmin(reduced))
            if reduced.flat[k] >= -tol:
                break
        else:
            negative = np.flatnonzero(reduced < -tol)
            if negative.size == 0:
                break
            k = int(negative[0])
        ei, ej = divmod(k, c)

        path = _tree_path(adj, ei, r + ej)
        cells = []
        for a, b in zip(path, path[1:]):
            cells.append((a, b - r) if a < r else (b, a - r))
        # cells alternate -, +, -, ... starting from the entering row
        minus = cells[0::2]
        plus = cells[1::2]
        theta = min(flow[e] for e in minus)
        leaving = min((e for e in minus if flow[e] == theta), key=lambda e: e[0] * c + e[1])
        for e in minus:
            flow[e] -= theta
        for e in plus:
            flow[e] += theta
        del flow[leaving]
        flow[(ei, ej)] = theta
        basis[basis.index(leaving)] = (ei, ej)
        streak = streak + 1 if theta == 0 else 0
    else:
        raise RuntimeError("transportation simplex did not terminate")

    flows = _tree_flows(basis, supply, demand, r, c)
    return basis, flows, u, v


def _check_pair(space, source, target, tol_mass):
    n = space.n
    a = np.asarray(getattr(source, "weights", source), dtype=float)
    b = np.asarray(getattr(target, "weights", target), dtype=float)
    if a.shape != (n,) or b.shape != (n,):
        raise InvalidArgumentError("measures must live on the given space")
    if np.any(a < 0) or np.any(b < 0):
        raise InvalidArgumentError("measures must be nonnegative")
    sa, sb = math.fsum(a), math.fsum(b)
    if abs(sa - sb) > tol_mass or abs(sa - 1.0) > tol_mass or abs(sb - 1.0) > tol_mass:
        raise InvalidArgumentError(f"mass mismatch: source {sa!r}, target {sb!r}")
    return a, b, sa, sb


def solve_ot(space, source, target, tol_mass=DEFAULT_TOL_MASS):
    """Optimal coupling of ``source`` and ``target`` for the cost ``dist**2``.

    Both measures are first rescaled to exactly unit total mass; the factors
    are stored on the returned plan.  Pivoting uses the most negative
    reduced cost with lowest-index tie-breaking, falling back to Bland's
    rule after a long run of degenerate pivots, so results are
    deterministic.

    Returns
    -------
    TransportPlan
        With dual potentials defined on every point of the space.
    """
    a, b, sa, sb = _check_pair(space, source, target, tol_mass)
    a = a / sa
    b = b / sb
    rows = np.flatnonzero(a > 0)
    cols = np.flatnonzero(b > 0)
    d = space.dist
    cost = d[np.ix_(rows, cols)] ** 2

    basis, flows, u, v = _transport_simplex(cost, a[rows], b[cols])

    n = space.n
    phi = np.zeros(n)
    psi = np.zeros(n)
    phi[rows] = u
    psi[cols] = v
    # extend potentials off the supports, keeping phi + psi <= dist**2 everywhere
    off_cols = np.setdiff1d(np.arange(n), cols)
    if off_cols.size:
        psi[off_cols] = (d[np.ix_(rows, off_cols)] ** 2 - u[:, None]).min(axis=0)
    off_rows = np.setdiff1d(np.arange(n), rows)
    if off_rows.size:
        phi[off_rows] = (d[off_rows, :] ** 2 - psi[None, :]).min(axis=1)

    entries = []
    total = []
    for (i, j), f in sorted(zip(basis, flows)):
        if f > 0:
            gi, gj = int(rows[i]), int(cols[j])
            entries.append((gi, gj, float(f)))
            total.append(f * cost[i, j])
    phi.setflags(write=False)
    psi.setflags(write=False)
    return TransportPlan(
        entries=tuple(entries),
        cost=math.fsum(total),
        dual_source=phi,
        dual_target=psi,
        source_scale=1.0 / sa,
        target_scale=1.0 / sb,
    )


def w2(space, source, target, tol_mass=DEFAULT_TOL_MASS):
    """Quadratic Wasserstein distance between two measures on ``space``."""
    return math.sqrt(max(solve_ot(space, source, target, tol_mass).cost, 0.0))


def w2_lower_bound(space, source, target):
    """Cheap lower bound: total variation times the smallest positive distance."""
    a = np.asarray(getattr(source, "weights", source), dtype=float)
    b = np.asarray(getattr(target, "weights", target), dtype=float)
    d = space.dist
    positive = d[d > 0]
    if positive.size == 0:
        return 0.0
    tv = 0.5 * float(np.abs(a - b).sum())
    return math.sqrt(tv) * float(positive.min())


def verify_certificate(space, plan, source, target, tol_dual=None, tol_mass=DEFAULT_TOL_MASS):
    """Check primal feasibility, dual feasibility, slackness and zero gap.

    A ``True`` result proves that ``plan`` is optimal up to ``tol_dual * n``
    regardless of how it was produced.
    """
    n = space.n
    if tol_dual is None:
        tol_dual = 1e-9 * space.diameter**2
    a = np.asarray(getattr(source, "weights", source), dtype=float)
    b = np.asarray(getattr(target, "weights", target), dtype=float)
    phi = np.asarray(plan.dual_source, dtype=float)
    psi = np.asarray(plan.dual_target, dtype=float)
    if phi.shape != (n,) or psi.shape != (n,):
        return False

    g = np.zeros((n, n))
    for i, j, mass in plan.entries:
        if mass < 0:
            return False
        g[i, j] += mass
    if np.any(np.abs(g.sum(axis=1) - a) > tol_mass):
        return False
    if np.any(np.abs(g.sum(axis=0) - b) > tol_mass):
        return False

    sq = space.dist**2
    if np.any(phi[:, None] + psi[None, :] > sq + tol_dual):
        return False
    for i, j, mass in plan.entries:
        if mass > 0 and phi[i] + psi[j] < sq[i, j] - tol_dual:
            return False

    primal = math.fsum(mass * sq[i, j] for i, j, mass in plan.entries)
    if abs(primal - plan.cost) > tol_dual * n:
        return False
    dual = math.fsum(phi * a) + math.fsum(psi * b)
    return abs(primal - dual) <= tol_dual * n


def oracle_ot_uniform(space, support_a, support_b):
    """Brute-force OT cost between uniform measures on equal-size supports.

    Enumerates all ``k!`` matchings; restricted to ``k <= 8``.
    """
    A, B = list(support_a), list(support_b)
    k = len(A)
    if k != len(B) or k == 0:
        raise InvalidArgumentError("supports must be nonempty and of equal size")
    if k > 8:
        raise InvalidArgumentError(f"oracle limited to k <= 8, got {k}")
    sq = space.dist**2
    best = math.inf
    for perm in itertools.permutations(range(k)):
        total = math.fsum(sq[A[i], B[p]] for i, p in enumerate(perm))
        best = min(best, total)
    return best / k


def variance(space, mu, tol_b=None):
    """``min_y sum_x dist[x, y]**2 mu[x]`` and the set of near-minimizers.

    Returns
    -------
    value : float
    argmin_set : ndarray of int
        Every ``y`` whose cost is within ``tol_b`` of the minimum.
    """
    from .barycenter import barycentric_cost

    if tol_b is None:
        tol_b = space.tol_b
    c = barycentric_cost(space, mu)
    value = float(c.min())
    return value, np.flatnonzero(c <= value + tol_b)
