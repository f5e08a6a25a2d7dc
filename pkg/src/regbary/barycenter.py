"""Barycentric cost, barycenter sets and the Wasserstein-regularized barycenter.

For a measure ``mu`` on a finite space the barycentric cost is
``c(y) = sum_x dist[x, y]**2 mu[x]`` and the barycenter set ``b(mu)`` is
its (tolerance-based) argmin.  The canonical barycenter ``B(mu)`` is the
measure supported on ``b(mu)`` that is closest in W2 to the reference
measure ``m``; it is obtained by sending each atom of ``m`` to its nearest
points of ``b(mu)``.

The regularized functional

    F_eps(nu) = <c, nu> + eps * W2(m, nu)**2

decouples over the atoms of ``m``: atom ``i`` goes to the minimizers of
``c(y) + eps * dist[i, y]**2``.  :func:`epsilon_sweep` follows those
minimizers as ``eps`` decreases and checks that they settle on ``B(mu)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InvalidArgumentError
from .ot import solve_ot, w2
from .space import Measure


def _weights(mu):
    return np.asarray(getattr(mu, "weights", mu), dtype=float)


def barycentric_cost(space, mu):
    """``c[y] = sum_x dist[x, y]**2 * mu[x]`` for every point ``y``."""
    w = _weights(mu)
    if w.shape != (space.n,):
        raise InvalidArgumentError("measure does not live on this space")
    # fixed reduction order along axis 0 keeps results bit-reproducible
    return ((space.dist**2) * w[:, None]).sum(axis=0)


def barycenter_set(space, mu, tol_b=None):
    """Points whose barycentric cost is within ``tol_b`` of the minimum."""
    if tol_b is None:
        tol_b = space.tol_b
    if tol_b < 0:
        raise InvalidArgumentError("tol_b must be nonnegative")
    c = barycentric_cost(space, mu)
    return np.flatnonzero(c <= c.min() + tol_b)


@dataclass(frozen=True)
class BarycenterResult:
    """Canonical barycenter ``B`` of a measure and how it was assembled.

    ``assignment[i]`` holds the nearest points of ``b_set`` that source atom
    ``i`` of ``m`` is split across (empty when ``m[i] == 0``); ``d0`` is the
    minimal barycentric cost.
    """

    b_set: np.ndarray
    B: Measure
    assignment: tuple
    d0: float

    def to_dict(self):
        return {
            "b_set": [int(i) for i in self.b_set],
            "B": self.B.to_dict(),
            "assignment": [[int(j) for j in a] for a in self.assignment],
            "d0": float(self.d0),
        }


def _push(space, targets_of):
    """Push ``m`` forward, splitting each atom uniformly over its targets."""
    out = np.zeros(space.n)
    for i in range(space.n):
        targets = targets_of[i]
        if len(targets):
            share = space.m[i] / len(targets)
            for j in targets:
                out[j] += share
    return out


def canonical_barycenter(space, mu, tol_b=None, tol_tie=None):
    """The Wasserstein-regularized barycenter ``B(mu)``.

    Each atom ``i`` of ``m`` is sent to the points of ``b(mu)`` within
    ``tol_tie`` of its nearest one, with its mass split evenly among them.
    Since only the source marginal is constrained, this nearest-point
    push-forward is the W2 projection of ``m`` onto measures supported on
    ``b(mu)``.
    """
    if tol_b is None:
        tol_b = space.tol_b
    if tol_tie is None:
        tol_tie = space.tol_tie
    c = barycentric_cost(space, mu)
    d0 = float(c.min())
    b_set = np.flatnonzero(c <= d0 + tol_b)

    sub = space.dist[:, b_set]
    nearest = sub.min(axis=1)
    assignment = []
    for i in range(space.n):
        if space.m[i] > 0:
            assignment.append(tuple(int(b_set[k]) for k in np.flatnonzero(sub[i] <= nearest[i] + tol_tie)))
        else:
            assignment.append(())
    B = Measure(_push(space, assignment))
    return BarycenterResult(b_set=b_set, B=B, assignment=tuple(assignment), d0=d0)


def _atom_targets(space, c, eps, tol_tie):
    """Per-atom minimizers of ``c(y) + eps * dist[i, y]**2``.

    Ties are judged on the effective distance
    ``sqrt(dist[i, y]**2 + (c(y) - min c) / eps)`` with tolerance
    ``tol_tie``, which reduces to the nearest-point rule of
    :func:`canonical_barycenter` on points where ``c`` is minimal.
    """
    excess = c - c.min()
    with np.errstate(over="ignore"):
        scaled = excess / eps
    targets = []
    for i in range(space.n):
        if space.m[i] > 0:
            eff = np.sqrt(space.dist[i] ** 2 + scaled)
            targets.append(np.flatnonzero(eff <= eff.min() + tol_tie))
        else:
            targets.append(())
    return targets


def _snapped_cost(space, mu, tol_b):
    c = barycentric_cost(space, mu)
    lo = c.min()
    return np.where(c <= lo + tol_b, lo, c)


def minimize_f_epsilon(space, mu, eps, snap=True, tol_b=None, tol_tie=None):
    """Minimizer of ``F_eps(nu) = <c_mu, nu> + eps * W2(m, nu)**2``.

    With ``snap`` the costs within ``tol_b`` of the minimum are first set to
    the minimum, so that the small-``eps`` limit is supported on the
    tolerance-based barycenter set rather than on the exact argmin.
    """
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps!r}")
    if tol_b is None:
        tol_b = space.tol_b
    if tol_tie is None:
        tol_tie = space.tol_tie
    c = _snapped_cost(space, mu, tol_b) if snap else barycentric_cost(space, mu)
    return Measure(_push(space, _atom_targets(space, c, eps, tol_tie)))


def f_epsilon_value(space, mu, nu, eps):
    """``F_eps(nu)`` with the transport term computed by the exact solver."""
    if eps < 0:
        raise InvalidArgumentError("eps must be nonnegative")
    c = barycentric_cost(space, mu)
    linear = math.fsum(c * _weights(nu))
    if eps == 0:
        return linear
    return linear + eps * solve_ot(space, space.reference, nu).cost


def flip_threshold(space, mu, tol_b=None, tol_tie=None):
    """Largest ``eps*`` such that the snapped minimizer equals ``B(mu)`` below it.

    For every atom ``i`` of ``m`` and every point ``y`` outside ``b(mu)``
    that would otherwise tie with or beat the nearest barycenter point, the
    regularizer must keep ``y``'s effective distance above the tie window;
    this holds for ``eps < excess(y) / ((d_i + tol_tie)**2 - dist[i, y]**2)``.
    Returns ``inf`` when no point outside ``b(mu)`` can ever compete.
    """
    if tol_b is None:
        tol_b = space.tol_b
    if tol_tie is None:
        tol_tie = space.tol_tie
    c = _snapped_cost(space, mu, tol_b)
    excess = c - c.min()
    inside = excess == 0
    best = math.inf
    for i in np.flatnonzero(space.m > 0):
        reach = (space.dist[i, inside].min() + tol_tie) ** 2
        sq = space.dist[i] ** 2
        rivals = (~inside) & (sq < reach)
        if rivals.any():
            best = min(best, float((excess[rivals] / (reach - sq[rivals])).min()))
    return best


@dataclass(frozen=True)
class EpsilonStep:
    eps: float
    mu_eps: Measure
    f_value: float
    gap: float


@dataclass
class EpsilonPath:
    """Trace of the regularization sweep, one step per ``eps`` value."""

    steps: list = field(default_factory=list)
    target: Measure | None = None

    @property
    def final_gap(self):
        return self.steps[-1].gap if self.steps else math.inf

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["eps", "f_value", "gap", "support_size"])
            for s in self.steps:
                writer.writerow(
                    [f"{s.eps:.17g}", f"{s.f_value:.17g}", f"{s.gap:.17g}", s.mu_eps.support().size]
                )


def epsilon_sweep(
    space,
    mu,
    eps0=1.0,
    ratio=0.5,
    max_steps=200,
    gap_tol=1e-10,
    snap=True,
    tol_b=None,
    tol_tie=None,
):
    """Follow ``mu_eps`` along ``eps_k = eps0 * ratio**k`` until it reaches ``B(mu)``.

    Stops at the first step whose W2 gap to ``B(mu)`` is at most
    ``gap_tol``.  Raises :class:`ConvergenceError` carrying the full path
    otherwise.
    """
    if not eps0 > 0:
        raise InvalidArgumentError("eps0 must be positive")
    if not 0 < ratio < 1:
        raise InvalidArgumentError("ratio must lie in (0, 1)")
    if max_steps < 1:
        raise InvalidArgumentError("max_steps must be at least 1")
    if gap_tol < 0:
        raise InvalidArgumentError("gap_tol must be nonnegative")
    target = canonical_barycenter(space, mu, tol_b=tol_b, tol_tie=tol_tie).B
    path = EpsilonPath(target=target)
    for k in range(max_steps):
        eps = eps0 * ratio**k
        mu_eps = minimize_f_epsilon(space, mu, eps, snap=snap, tol_b=tol_b, tol_tie=tol_tie)
        path.steps.append(
            EpsilonStep(
                eps=eps,
                mu_eps=mu_eps,
                f_value=f_epsilon_value(space, mu, mu_eps, eps),
                gap=w2(space, mu_eps, target),
            )
        )
        if path.steps[-1].gap <= gap_tol:
            return path
    raise ConvergenceError(
        f"gap {path.final_gap:.3e} above {gap_tol:.3e} after {max_steps} steps", path
    )
