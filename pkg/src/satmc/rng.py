"""Seedable, platform-independent randomness.

Every stochastic step in this package (formula generation, variable
sampling, Monte-Carlo trials) draws from SplitMix64 (Steele, Lea & Flood,
2014) rather than a library RNG, so that corpora and experiments reproduce
bit-for-bit across platforms and interpreter versions. Child streams are
derived with :func:`derive_seed`, a pure function of the root seed and an
integer path, which keeps independent work items (instances, literals,
trials) reproducible regardless of evaluation order.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

# SplitMix64 constants.
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijective avalanche mix of a 64-bit word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(root: int, *path: int) -> int:
    """Derive a child seed from ``root`` and an integer path.

    Each path component is spread with the golden-ratio multiplier and
    folded in with :func:`mix64`, so nearby roots/paths yield unrelated
    streams. Pure function; the same (root, path) always maps to the same
    child seed.
    """
    s = root & MASK64
    for p in path:
        s = mix64(s ^ ((p & MASK64) * _GOLDEN & MASK64))
    return s


class SplitMix64:
    """SplitMix64 stream generator over 64-bit state."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        """Next raw 64-bit output."""
        self.state = (self.state + _GOLDEN) & MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), bias-free via rejection sampling."""
        if n <= 0:
            raise ValueError("below() requires n >= 1")
        limit = (MASK64 + 1) - ((MASK64 + 1) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def coin(self) -> bool:
        """Fair boolean; True iff the draw is 1."""
        return self.below(2) == 1

    def choose(self, pool: list[int], k: int) -> list[int]:
        """k distinct elements of ``pool``, drawn without replacement.

        Partial Fisher-Yates over a copy of ``pool``; the result order is
        the draw order. ``pool`` itself is untouched.
        """
        if not 0 <= k <= len(pool):
            raise ValueError("cannot draw %d from pool of %d" % (k, len(pool)))
        a = list(pool)
        for i in range(k):
            j = i + self.below(len(a) - i)
            a[i], a[j] = a[j], a[i]
        return a[:k]
