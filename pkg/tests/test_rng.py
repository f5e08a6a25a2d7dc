import numpy as np
import pytest

from regbary.rng import SplitMix64


class TestSplitMix64:
    def test_reference_values(self):
        r = SplitMix64(0)
        assert r.next_u64() == 0xE220A8397B1DCDAF
        assert r.next_u64() == 0x6E789E6AA1B965F4

    def test_reproducible(self):
        a, b = SplitMix64(42), SplitMix64(42)
        assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]

    def test_random_range(self, smrng):
        xs = [smrng.random() for _ in range(2000)]
        assert 0.0 <= min(xs) and max(xs) < 1.0
        assert abs(np.mean(xs) - 0.5) < 0.03

    def test_integers_bounds(self, smrng):
        xs = {smrng.integers(3, 7) for _ in range(500)}
        assert xs == {3, 4, 5, 6}

    def test_sample_distinct(self, smrng):
        s = smrng.sample(range(20), 7)
        assert len(set(s)) == 7 and all(0 <= v < 20 for v in s)

    def test_shuffle_is_permutation(self, smrng):
        items = list(range(15))
        smrng.shuffle(items)
        assert sorted(items) == list(range(15))

    def test_dirichlet_sums_to_one(self, smrng):
        w = np.asarray(smrng.dirichlet_flat(9))
        assert w.shape == (9,)
        assert np.all(w >= 0)
        assert w.sum() == pytest.approx(1.0, abs=1e-15)

    def test_spawn_independent_of_parent_use(self):
        a, b = SplitMix64(5), SplitMix64(5)
        ca = a.spawn()
        cb = b.spawn()
        a.next_u64()
        assert ca.next_u64() == cb.next_u64()
