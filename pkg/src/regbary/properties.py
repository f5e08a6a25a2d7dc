"""Randomized property suite shared by the ``check`` command and the tests.

All randomness comes from :class:`~regbary.rng.SplitMix64`, so a seed fixes
every generated space, measure and test function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .barycenter import (
    canonical_barycenter,
    epsilon_sweep,
    f_epsilon_value,
    flip_threshold,
    minimize_f_epsilon,
)
from .dynamics import jensen_check, martingale_check, orbit, support_determines_check
from .errors import ConvergenceError, InvalidArgumentError
from .ot import oracle_ot_uniform, solve_ot, variance, verify_certificate, w2
from .rng import SplitMix64
from .space import Measure, build_circle, build_graph, build_interval, build_sphere_grid, validate

SLACK = 1e-9


# -- generators ---------------------------------------------------------------


def random_graph_space(rng, n_min=2, n_max=60, full_support=True):
    """Connected random graph (random tree plus extra chords) with lengths in [0.1, 1]."""
    n = rng.integers(n_min, n_max + 1)
    edges = [(v, rng.integers(0, v), rng.uniform(0.1, 1.0)) for v in range(1, n)]
    for _ in range(n // 2):
        i, j = rng.integers(0, n), rng.integers(0, n)
        if i != j:
            edges.append((i, j, rng.uniform(0.1, 1.0)))
    if full_support and rng.random() < 0.5:
        m = None
    elif full_support:
        m = rng.dirichlet_flat(n)
    else:
        k = rng.integers(1, n + 1)
        m = np.zeros(n)
        m[rng.sample(range(n), k)] = rng.dirichlet_flat(k)
    return build_graph(edges, n, m)


def random_measure(rng, n, support_size=None):
    """Flat-Dirichlet weights on a random support (of random size when omitted)."""
    k = rng.integers(1, n + 1) if support_size is None else support_size
    w = np.zeros(n)
    w[rng.sample(range(n), k)] = rng.dirichlet_flat(k)
    return Measure(w)


def random_measure_on(rng, n, support):
    support = list(support)
    w = np.zeros(n)
    w[support] = rng.dirichlet_flat(len(support))
    return Measure(w)


def random_convex_function(rng, space):
    """Random discretely convex function on an interval space.

    Slopes start at a random value and increase by uniform positive steps.
    """
    order = np.argsort(space.coords[:, 0], kind="stable")
    x = space.coords[order, 0]
    n = x.size
    slopes = [rng.uniform(-1.0, 1.0)]
    for _ in range(n - 2):
        slopes.append(slopes[-1] + rng.random())
    values = [rng.uniform(-1.0, 1.0)]
    for k in range(n - 1):
        values.append(values[-1] + slopes[k] * (x[k + 1] - x[k]))
    phi = np.empty(n)
    phi[order] = values
    return phi


# -- properties ---------------------------------------------------------------


@dataclass
class PropertyResult:
    name: str
    passed: bool
    trials: int
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{status}  {self.name:<22} trials={self.trials}{extra}"


def builtin_spaces():
    return [build_circle(12), build_circle(16), build_sphere_grid(5, 8), build_interval(11)]


def check_metric_axioms(spaces):
    bad = []
    for k, space in enumerate(spaces):
        report = validate(space)
        if not report.ok:
            bad.append(f"space {k}: {', '.join(report.kinds())}")
    return PropertyResult("metric_axioms", not bad, len(spaces), "; ".join(bad))


def check_ot_certificates(rng, trials):
    for t in range(trials):
        space = random_graph_space(rng, n_max=30)
        a, b = random_measure(rng, space.n), random_measure(rng, space.n)
        plan = solve_ot(space, a, b)
        if not verify_certificate(space, plan, a, b, tol_dual=1e-9 * space.diameter**2):
            return PropertyResult("ot_certificates", False, trials, f"trial {t}")
    return PropertyResult("ot_certificates", True, trials)


def check_w2_metric(rng, trials):
    for t in range(trials):
        space = random_graph_space(rng, n_max=20)
        a, b, c = (random_measure(rng, space.n) for _ in range(3))
        ab, ba = w2(space, a, b), w2(space, b, a)
        if abs(ab - ba) > 1e-10 or w2(space, a, c) > ab + w2(space, b, c) + SLACK:
            return PropertyResult("w2_metric", False, trials, f"trial {t}")
    return PropertyResult("w2_metric", True, trials)


def check_oracle_equivalence(rng, trials):
    worst = 0.0
    for _ in range(trials):
        space = random_graph_space(rng, n_min=6, n_max=20)
        k = rng.integers(1, 7)
        A = sorted(rng.sample(range(space.n), k))
        B = sorted(rng.sample(range(space.n), k))
        cost = solve_ot(space, Measure.uniform(space.n, A), Measure.uniform(space.n, B)).cost
        worst = max(worst, abs(cost - oracle_ot_uniform(space, A, B)))
    return PropertyResult("oracle_equivalence", worst <= SLACK, trials, f"max diff {worst:.2e}")


def check_support_sandwich(rng, trials):
    for t in range(trials):
        space = random_graph_space(rng, full_support=rng.random() < 0.5)
        mu = random_measure(rng, space.n)
        res = canonical_barycenter(space, mu)
        b = set(res.b_set.tolist())
        supp = set(res.B.support().tolist())
        must = {i for i in b if space.m[i] > 0}
        if not (must <= supp <= b):
            return PropertyResult("support_sandwich", False, trials, f"trial {t}")
    return PropertyResult("support_sandwich", True, trials)


def check_projection_optimality(rng, trials, competitors=5):
    for t in range(trials):
        space = random_graph_space(rng, n_max=30)
        mu = random_measure(rng, space.n)
        res = canonical_barycenter(space, mu)
        best = solve_ot(space, space.reference, res.B).cost
        for _ in range(competitors):
            nu = random_measure_on(rng, space.n, res.b_set)
            if best > solve_ot(space, space.reference, nu).cost + SLACK:
                return PropertyResult("projection_optimality", False, trials, f"trial {t}")
    return PropertyResult("projection_optimality", True, trials)


def check_f_epsilon_optimality(rng, trials, competitors=5):
    for t in range(trials):
        space = random_graph_space(rng, n_max=20)
        mu = random_measure(rng, space.n)
        for eps in (1.0, 0.1, 0.01):
            best = f_epsilon_value(space, mu, minimize_f_epsilon(space, mu, eps, snap=False), eps)
            for _ in range(competitors):
                nu = random_measure(rng, space.n)
                if best > f_epsilon_value(space, mu, nu, eps) + SLACK:
                    return PropertyResult("f_epsilon_optimality", False, trials, f"trial {t}")
    return PropertyResult("f_epsilon_optimality", True, trials)


def check_epsilon_limit(rng, trials):
    for t in range(trials):
        space = random_graph_space(rng, n_max=30)
        mu = random_measure(rng, space.n)
        B = canonical_barycenter(space, mu).B
        eps_star = flip_threshold(space, mu)
        eps = 1.0 if math.isinf(eps_star) else 0.5 * eps_star
        if not np.array_equal(minimize_f_epsilon(space, mu, eps).weights, B.weights):
            return PropertyResult("epsilon_limit", False, trials, f"trial {t}: below threshold")
        try:
            epsilon_sweep(space, mu, max_steps=200)
        except ConvergenceError:
            return PropertyResult("epsilon_limit", False, trials, f"trial {t}: no convergence")
    return PropertyResult("epsilon_limit", True, trials)


def check_variance_monotonicity(rng, trials):
    worst = -math.inf
    for _ in range(trials):
        space = random_graph_space(rng)
        mu = random_measure(rng, space.n)
        B = canonical_barycenter(space, mu).B
        worst = max(worst, variance(space, B)[0] - variance(space, mu)[0])
    return PropertyResult(
        "variance_monotonicity", worst <= SLACK, trials, f"max increase {worst:.2e}"
    )


def check_period_bound(rng, trials, max_iter=50):
    periods = {}
    for t in range(trials):
        space = random_graph_space(rng, n_max=30)
        report = orbit(space, random_measure(rng, space.n), max_iter=max_iter)
        periods[report.period] = periods.get(report.period, 0) + 1
        if report.period is not None and report.period > 2:
            return PropertyResult("period_bound", False, trials, f"trial {t}: period {report.period}")
    summary = ", ".join(f"{k}:{v}" for k, v in sorted(periods.items(), key=lambda kv: str(kv[0])))
    return PropertyResult("period_bound", True, trials, f"periods {{{summary}}}")


def check_jensen(rng, trials, measures_per_function=20):
    space = build_interval(101)
    for t in range(trials):
        phi = random_convex_function(rng, space)
        for _ in range(measures_per_function):
            mu = random_measure(rng, space.n, support_size=space.n)
            if not jensen_check(space, mu, phi):
                return PropertyResult("jensen", False, trials, f"function {t}")
    return PropertyResult("jensen", True, trials)


def check_martingale(rng, trials):
    for t in range(trials):
        space = random_graph_space(rng, full_support=rng.random() < 0.5)
        if not martingale_check(space, random_measure(rng, space.n)):
            return PropertyResult("martingale", False, trials, f"trial {t}")
    return PropertyResult("martingale", True, trials)


def check_support_determines(rng, trials, pool_size=12):
    pairs = 0
    for t in range(trials):
        space = random_graph_space(rng, n_max=12)
        pool = [random_measure(rng, space.n) for _ in range(pool_size)]
        supports = [tuple(canonical_barycenter(space, mu).B.support()) for mu in pool]
        for i in range(pool_size):
            for j in range(i + 1, pool_size):
                if supports[i] == supports[j]:
                    pairs += 1
                    if not support_determines_check(space, pool[i], pool[j]):
                        return PropertyResult("support_determines", False, trials, f"trial {t}")
    return PropertyResult("support_determines", True, trials, f"{pairs} matching pairs")


def run_suite(seed, trials, extra_spaces=()):
    """Run every property with its own child stream; returns a list of results."""
    if trials < 1:
        raise InvalidArgumentError("trials must be at least 1")
    root = SplitMix64(seed)
    streams = [root.spawn() for _ in range(12)]
    rng_spaces = streams[0]
    spaces = builtin_spaces() + [random_graph_space(rng_spaces) for _ in range(min(trials, 20))]
    spaces += list(extra_spaces)
    # cheap properties run at full size, expensive ones at a fraction
    few = max(1, trials // 5)
    return [
        check_metric_axioms(spaces),
        check_ot_certificates(streams[1], trials),
        check_w2_metric(streams[2], few),
        check_oracle_equivalence(streams[3], trials),
        check_support_sandwich(streams[4], trials),
        check_projection_optimality(streams[5], few),
        check_f_epsilon_optimality(streams[6], few),
        check_epsilon_limit(streams[7], few),
        check_variance_monotonicity(streams[8], trials),
        check_period_bound(streams[9], trials),
        check_jensen(streams[10], few),
        check_martingale(streams[11], trials),
        check_support_determines(root.spawn(), few),
    ]

