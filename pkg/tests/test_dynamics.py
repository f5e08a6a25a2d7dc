import csv
import json
import math

import numpy as np
import pytest

from regbary.barycenter import canonical_barycenter
from regbary.dynamics import (
    OrbitReport,
    is_discretely_convex,
    jensen_check,
    martingale_check,
    orbit,
    support_determines_check,
    variance_sequence,
)
from regbary.errors import InvalidArgumentError, PropertyFailure
from regbary.ot import variance
from regbary.properties import random_convex_function, random_graph_space, random_measure
from regbary.rng import SplitMix64
from regbary.space import Measure, MetricMeasureSpace, build_circle, build_interval


class TestOrbit:
    def test_dirac_is_fixed(self, circle16):
        rep = orbit(circle16, Measure.dirac(16, 3))
        assert (rep.period, rep.entry_index) == (1, 0)
        assert np.array_equal(rep.iterates[1].weights, rep.iterates[0].weights)
        assert rep.w2_to_prev[1] == 0.0

    def test_odd_circle_fixed_point(self):
        space = build_circle(12)
        rep = orbit(space, Measure.uniform(12, [0, 4, 8]))
        assert rep.period == 1
        assert len(rep.iterates) == 2

    def test_even_circle_two_cycle(self, circle16):
        mu = Measure.uniform(16, [0, 4, 8, 12])
        rep = orbit(circle16, mu)
        assert (rep.period, rep.entry_index) == (2, 0)
        assert rep.iterates[1].support().tolist() == [2, 6, 10, 14]
        np.testing.assert_allclose(rep.iterates[1].weights[[2, 6, 10, 14]], 0.25, atol=1e-12)
        # every atom moves two grid steps
        assert rep.w2_to_prev[1] == pytest.approx(2 * 2 * math.pi / 16, rel=1e-12)

    def test_sphere_poles_two_cycle(self, sphere, poles_measure, equator):
        rep = orbit(sphere, poles_measure)
        assert rep.period == 2
        assert rep.iterates[1].support().tolist() == equator
        np.testing.assert_allclose(rep.variances, (math.pi / 2) ** 2, atol=1e-10)

    def test_first_iterate_recorded(self, circle16):
        mu = Measure.uniform(16, [0, 4, 8, 12])
        rep = orbit(circle16, mu)
        assert rep.iterates[0] is mu
        assert math.isnan(rep.w2_to_prev[0])
        assert len(rep.variances) == len(rep.iterates) == len(rep.w2_to_prev)

    def test_no_cycle_within_budget(self, circle16):
        # with max_iter=0 nothing is computed beyond the start
        rep = orbit(circle16, Measure.dirac(16, 0), max_iter=0)
        assert rep.period is None and rep.entry_index is None
        assert len(rep.iterates) == 1

    def test_bad_match_tol(self, circle16):
        with pytest.raises(InvalidArgumentError):
            orbit(circle16, Measure.dirac(16, 0), match_tol=0.0)

    def test_random_periods_at_most_two(self):
        rng = SplitMix64(7)
        for _ in range(40):
            space = random_graph_space(rng, n_max=25)
            rep = orbit(space, random_measure(rng, space.n))
            assert rep.period in (1, 2)


class TestExport:
    def test_csv(self, tmp_path, circle16):
        rep = orbit(circle16, Measure.uniform(16, [0, 4, 8, 12]))
        path = tmp_path / "orbit.csv"
        rep.write_csv(path)
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["iter", "variance", "support_size", "w2_to_prev"]
        assert len(rows) == 1 + len(rep.iterates)
        assert rows[1][3] == ""
        assert float(rows[2][1]) == rep.variances[1]
        assert int(rows[2][2]) == 4

    def test_json(self, tmp_path, circle16):
        rep = orbit(circle16, Measure.uniform(16, [0, 4, 8, 12]))
        path = tmp_path / "orbit.json"
        rep.write_json(path)
        data = json.loads(path.read_text())
        assert data["period"] == 2 and data["entry_index"] == 0
        assert len(data["iterates"]) == len(rep.iterates)
        assert data["variances"] == rep.variances


class TestVarianceSequence:
    def test_accepts_orbits(self, sphere, poles_measure, circle16):
        variance_sequence(orbit(sphere, poles_measure), equality_case=True)
        variance_sequence(orbit(circle16, Measure.uniform(16, [0, 4, 8, 12])), equality_case=True)

    def test_detects_increase(self, circle16):
        rep = OrbitReport(
            iterates=[Measure.dirac(16, 0), Measure.uniform(16, [0, 8])],
            variances=[0.0, 1.0],
            w2_to_prev=[math.nan, 1.0],
        )
        with pytest.raises(PropertyFailure) as info:
            variance_sequence(rep)
        assert info.value.indices == (0, 1)

    def test_equality_case_support_condition(self):
        a, b, c = Measure.dirac(4, 0), Measure.dirac(4, 1), Measure.dirac(4, 2)
        rep = OrbitReport(iterates=[a, b, c], variances=[0.0, 0.0, 0.0], w2_to_prev=[math.nan, 1, 1])
        variance_sequence(rep)
        with pytest.raises(PropertyFailure):
            variance_sequence(rep, equality_case=True)

    def test_random_monotone(self):
        rng = SplitMix64(11)
        for _ in range(60):
            space = random_graph_space(rng, n_max=30)
            mu = random_measure(rng, space.n)
            B = canonical_barycenter(space, mu).B
            assert variance(space, B)[0] <= variance(space, mu)[0] + 1e-9


class TestConvexity:
    def test_constant_on_any_space(self, circle16):
        assert is_discretely_convex(circle16, np.full(16, 2.5))

    def test_nonconstant_needs_line(self, circle16):
        assert not is_discretely_convex(circle16, np.arange(16.0))

    def test_interval(self):
        space = build_interval(11)
        x = space.coords[:, 0]
        assert is_discretely_convex(space, (x - 0.3) ** 2)
        assert is_discretely_convex(space, -x)
        assert not is_discretely_convex(space, -((x - 0.3) ** 2))

    def test_generated_functions_convex(self, smrng):
        space = build_interval(101)
        for _ in range(20):
            assert is_discretely_convex(space, random_convex_function(smrng, space))


class TestJensen:
    def test_constant(self, sphere, poles_measure):
        assert jensen_check(sphere, poles_measure, np.ones(sphere.n))

    def test_uniform_interval_collapses_to_midpoint(self):
        space = build_interval(101)
        mu = Measure.uniform(101)
        assert canonical_barycenter(space, mu).B.support().tolist() == [50]
        x = space.coords[:, 0]
        assert jensen_check(space, mu, (x - 0.2) ** 2)
        assert jensen_check(space, mu, np.abs(x - 0.7))

    def test_sparse_counterexample(self):
        # the mean 1/300 rounds to the endpoint, which a decreasing phi penalizes
        space = build_interval(101)
        mu = Measure.from_atoms(101, {0: 2 / 3, 1: 1 / 3})
        assert canonical_barycenter(space, mu).B.support().tolist() == [0]
        assert not jensen_check(space, mu, -space.coords[:, 0], slack=0.0)

    def test_rejects_nonconvex(self):
        space = build_interval(11)
        with pytest.raises(InvalidArgumentError):
            jensen_check(space, Measure.uniform(11), -(space.coords[:, 0] ** 2))

    def test_rejects_bad_shape(self):
        space = build_interval(11)
        with pytest.raises(InvalidArgumentError):
            jensen_check(space, Measure.uniform(11), np.zeros(5))

    def test_random_full_support(self, smrng):
        space = build_interval(101)
        for _ in range(10):
            phi = random_convex_function(smrng, space)
            for _ in range(5):
                assert jensen_check(space, random_measure(smrng, 101, support_size=101), phi)


class TestMartingale:
    def test_fixtures(self, sphere, poles_measure, circle16):
        assert martingale_check(sphere, poles_measure)
        assert martingale_check(circle16, Measure.uniform(16, [0, 4, 8, 12]))

    def test_random(self, smrng):
        for _ in range(50):
            space = random_graph_space(smrng, full_support=False)
            assert martingale_check(space, random_measure(smrng, space.n))


class TestSupportDetermines:
    def test_circle_same_support(self):
        space = build_circle(12)
        mu = Measure.uniform(12, [0, 4, 8])
        nu = Measure.from_atoms(12, {0: 0.5, 4: 0.25, 8: 0.25})
        Bm, Bn = canonical_barycenter(space, mu).B, canonical_barycenter(space, nu).B
        if np.array_equal(Bm.support(), Bn.support()):
            assert np.allclose(Bm.weights, Bn.weights)
        assert support_determines_check(space, mu, nu)

    def test_different_supports_vacuous(self, circle16):
        assert support_determines_check(circle16, Measure.dirac(16, 0), Measure.dirac(16, 5))

    def test_random(self, smrng):
        pairs = 0
        for _ in range(30):
            space = random_graph_space(smrng, n_max=10)
            pool = [random_measure(smrng, space.n) for _ in range(8)]
            for i in range(8):
                for j in range(i + 1, 8):
                    assert support_determines_check(space, pool[i], pool[j])
                    pairs += 1
        assert pairs == 30 * 28

    def test_requires_full_support(self):
        dist = build_circle(4).dist
        space = MetricMeasureSpace(dist, [0.5, 0.5, 0.0, 0.0])
        with pytest.raises(InvalidArgumentError):
            support_determines_check(space, Measure.dirac(4, 0), Measure.dirac(4, 1))
