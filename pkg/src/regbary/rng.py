"""SplitMix64 pseudorandom stream.

The randomized property suites draw every random number from this
generator so that a seed fully determines a run, independently of the
numpy version or platform.
"""

import math

_MASK = (1 << 64) - 1


class SplitMix64:
    """Steele, Lea and Flood's SplitMix64 sequence over a 64-bit state."""

    def __init__(self, seed):
        if not isinstance(seed, int):
            raise TypeError("seed must be an int")
        self.state = seed & _MASK

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self):
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low, high):
        return low + (high - low) * self.random()

    def integers(self, low, high):
        """Uniform integer in [low, high) by rejection sampling."""
        span = high - low
        if span <= 0:
            raise ValueError("empty range")
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            x = self.next_u64()
            if x < limit:
                return low + x % span

    def shuffle(self, items):
        """Fisher-Yates shuffle in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.integers(0, i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def sample(self, population, k):
        pool = list(population)
        self.shuffle(pool)
        return pool[:k]

    def dirichlet_flat(self, k):
        """Uniform draw from the (k-1)-simplex via normalized exponentials."""
        draws = [-math.log(1.0 - self.random()) for _ in range(k)]
        total = math.fsum(draws)
        return [d / total for d in draws]

    def spawn(self):
        """Independent child stream seeded from this one."""
        return SplitMix64(self.next_u64())
