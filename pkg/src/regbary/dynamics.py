"""The discrete dynamical system ``mu -> B(mu)``.

Orbits are iterated until an iterate comes back (in W2) to an earlier one;
the theory allows only fixed points and 2-cycles.  The remaining checks
test variance reduction, Jensen's inequality for convex test functions,
the martingale property of the product coupling, and the fact that the
support of ``B(mu)`` determines it.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .barycenter import barycenter_set, canonical_barycenter
from .errors import InvalidArgumentError, PropertyFailure
from .ot import variance, w2, w2_lower_bound

VARIANCE_SLACK = 1e-9


@dataclass
class OrbitReport:
    """Iterates ``mu, B(mu), B(B(mu)), ...`` and what was detected.

    ``period`` is ``None`` when no iterate matched an earlier one within
    ``max_iter`` steps.  ``w2_to_prev[k]`` is the W2 distance between
    iterates ``k - 1`` and ``k`` (``nan`` for ``k = 0``).
    """

    iterates: list = field(default_factory=list)
    period: int | None = None
    entry_index: int | None = None
    variances: list = field(default_factory=list)
    w2_to_prev: list = field(default_factory=list)

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iter", "variance", "support_size", "w2_to_prev"])
            for k, (mu, v, gap) in enumerate(zip(self.iterates, self.variances, self.w2_to_prev)):
                writer.writerow(
                    [k, f"{v:.17g}", mu.support().size, "" if math.isnan(gap) else f"{gap:.17g}"]
                )

    def write_json(self, path):
        data = {
            "period": self.period,
            "entry_index": self.entry_index,
            "variances": list(self.variances),
            "iterates": [mu.to_dict() for mu in self.iterates],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh)


def _matches(space, a, b, match_tol):
    if np.array_equal(a.weights, b.weights):
        return True
    if w2_lower_bound(space, a, b) > match_tol:
        return False
    return w2(space, a, b) <= match_tol


def orbit(space, mu0, max_iter=50, match_tol=None, tol_b=None, tol_tie=None):
    """Iterate ``B`` from ``mu0`` until a cycle is found or ``max_iter`` runs out.

    Each new iterate is compared with every earlier one, so pre-periodic
    tails are handled; the period is the index gap of the first match.
    """
    if match_tol is None:
        match_tol = 1e-8 * space.diameter
    if not match_tol > 0:
        raise InvalidArgumentError("match_tol must be positive")
    report = OrbitReport()
    current = mu0
    report.iterates.append(current)
    report.variances.append(variance(space, current, tol_b)[0])
    report.w2_to_prev.append(math.nan)
    for _ in range(max_iter):
        nxt = canonical_barycenter(space, current, tol_b=tol_b, tol_tie=tol_tie).B
        report.w2_to_prev.append(w2(space, current, nxt))
        report.iterates.append(nxt)
        report.variances.append(variance(space, nxt, tol_b)[0])
        t = len(report.iterates) - 1
        for j in range(t):
            if _matches(space, report.iterates[j], nxt, match_tol):
                report.period = t - j
                report.entry_index = j
                return report
        current = nxt
    return report


def variance_sequence(report, space=None, equality_case=False, slack=VARIANCE_SLACK):
    """Check that variances never increase along an orbit.

    With ``equality_case`` (meant for exactly symmetric fixtures), every
    step that keeps the variance also requires
    ``supp(mu_k) ⊆ supp(mu_{k+2})``.  Raises :class:`PropertyFailure`.
    """
    v = report.variances
    for k in range(len(v) - 1):
        if v[k + 1] > v[k] + slack:
            raise PropertyFailure(
                f"variance increased from {v[k]!r} to {v[k + 1]!r} at step {k}", (k, k + 1)
            )
    if equality_case:
        its = report.iterates
        for k in range(len(v) - 1):
            if abs(v[k + 1] - v[k]) <= slack and k + 2 < len(its):
                here = set(its[k].support().tolist())
                later = set(its[k + 2].support().tolist())
                if not here <= later:
                    raise PropertyFailure(
                        f"equal variance at step {k} but supp(mu_{k}) not in supp(mu_{k + 2})",
                        (k, k + 2),
                    )
    return report


def _geodesic_order(space):
    if space.coords is None or space.coords.shape[1] != 1:
        return None
    return np.argsort(space.coords[:, 0], kind="stable")


def is_discretely_convex(space, phi, tol=1e-12):
    """Whether ``phi`` has nondecreasing slopes along the interval order.

    Constants count as convex on any space; other functions need 1-D
    coordinates.
    """
    phi = np.asarray(phi, dtype=float)
    scale = max(1.0, float(np.abs(phi).max()))
    if np.ptp(phi) <= tol * scale:
        return True
    order = _geodesic_order(space)
    if order is None:
        return False
    x = space.coords[order, 0]
    y = phi[order]
    slopes = np.diff(y) / np.diff(x)
    return bool(np.all(np.diff(slopes) >= -tol * scale / float(np.diff(x).min())))


def jensen_check(space, mu, phi, tol_b=None, tol_tie=None, slack=1e-9):
    """``<phi, B(mu)> <= <phi, mu>`` for a geodesically convex ``phi``."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (space.n,):
        raise InvalidArgumentError("phi must have one value per point")
    if not is_discretely_convex(space, phi):
        raise InvalidArgumentError("phi is not geodesically convex on this space")
    B = canonical_barycenter(space, mu, tol_b=tol_b, tol_tie=tol_tie).B
    return math.fsum(phi * B.weights) <= math.fsum(phi * mu.weights) + slack


def martingale_check(space, mu, tol_b=None, tol_tie=None):
    """Whether the product coupling of ``B(mu)`` and ``mu`` is a martingale.

    Conditioned on any ``y`` charged by ``B(mu)`` the product coupling
    returns ``mu`` itself, so the property is ``supp B(mu) ⊆ b(mu)``.
    """
    B = canonical_barycenter(space, mu, tol_b=tol_b, tol_tie=tol_tie).B
    b = set(barycenter_set(space, mu, tol_b).tolist())
    return all(int(y) in b for y in B.support())


def support_determines_check(space, mu, nu, tau=0.0, tol_b=None, tol_tie=None, slack=1e-9):
    """If ``B(mu)`` and ``B(nu)`` share a support, they must coincide.

    Requires a reference measure with full support.
    """
    if np.any(space.m <= 0):
        raise InvalidArgumentError("support_determines_check needs m with full support")
    Bm = canonical_barycenter(space, mu, tol_b=tol_b, tol_tie=tol_tie).B
    Bn = canonical_barycenter(space, nu, tol_b=tol_b, tol_tie=tol_tie).B
    if not np.array_equal(Bm.support(tau), Bn.support(tau)):
        return True
    return w2(space, Bm, Bn) <= slack
