"""Seeded instance families.

Randomness comes from SplitMix64 (Steele, Lea & Flood 2014; the generator
used to seed xoshiro), which is a few lines in any language. Bounded draws
use rejection on the top of the 64-bit range so they are exactly uniform,
and shuffles are Fisher-Yates from the last index down. Same family, parameters
and seed give the same set in any implementation that follows these three rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from .gf2core import MAX_DIM, F2Set

_MASK64 = (1 << 64) - 1

# enumerate-and-shuffle up to this many candidates, rejection sampling beyond
SHUFFLE_LIMIT = 1 << 20


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound)."""
        if not 1 <= bound <= 1 << 64:
            raise ValueError("bound out of range")
        limit = (1 << 64) - (1 << 64) % bound
        while True:
            x = self.next()
            if x < limit:
                return x % bound

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"n must be in [1, {MAX_DIM}], got {n}")


def _subspace_element(i: int, n: int, d: int) -> int:
    """The i-th element of span(e_1..e_d): the d bits of i in coordinates 1..d."""
    return i << (n - d)


def gen_weight_one_prefix(n: int, t: int) -> F2Set:
    """All vectors with exactly one 1, located in the first t coordinates."""
    _check_n(n)
    if not 1 <= t <= n:
        raise ValueError(f"need 1 <= t <= n, got t={t}, n={n}")
    return F2Set(n, (1 << (n - c) for c in range(1, t + 1)))


def gen_subspace(n: int, d: int) -> F2Set:
    _check_n(n)
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got d={d}, n={n}")
    if d > 24:
        raise ValueError("subspace too large to enumerate")
    return F2Set(n, (_subspace_element(i, n, d) for i in range(1 << d)))


def _sample_distinct(rng: SplitMix64, universe: int, m: int,
                     accept: Callable[[int], bool] | None = None) -> list[int]:
    """m distinct values from range(universe) (optionally filtered), in draw order."""
    if universe <= SHUFFLE_LIMIT:
        pool = [x for x in range(universe) if accept is None or accept(x)]
        if m > len(pool):
            raise ValueError(f"cannot draw {m} distinct elements from {len(pool)}")
        rng.shuffle(pool)
        return pool[:m]
    chosen: list[int] = []
    seen: set[int] = set()
    while len(chosen) < m:
        x = rng.below(universe)
        if x in seen or (accept is not None and not accept(x)):
            continue
        seen.add(x)
        chosen.append(x)
    return chosen


def gen_dense_subspace_sample(n: int, d: int, density: Fraction | str, seed: int) -> F2Set:
    """ceil(density * 2^d) uniformly chosen elements of span(e_1..e_d)."""
    _check_n(n)
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got d={d}, n={n}")
    density = Fraction(density)
    if not 0 < density <= 1:
        raise ValueError("density must be in (0, 1]")
    m = math.ceil(density * (1 << d))
    idx = _sample_distinct(SplitMix64(seed), 1 << d, m)
    return F2Set(n, (_subspace_element(i, n, d) for i in idx))


def gen_subspace_plus_points(n: int, d: int, k: int, seed: int, coset: bool = False) -> F2Set:
    """V = span(e_1..e_d) together with k seeded points outside V.

    With ``coset`` the points are drawn from a single seeded coset p + V.
    """
    _check_n(n)
    if not 0 <= d < n:
        raise ValueError(f"need 0 <= d < n, got d={d}, n={n}")
    if k < 1:
        raise ValueError("k must be at least 1")
    rng = SplitMix64(seed)
    low = n - d                 # coordinates d+1..n occupy the low n-d bits
    V = [_subspace_element(i, n, d) for i in range(1 << d)]
    if coset:
        if k > 1 << d:
            raise ValueError(f"a coset holds only {1 << d} points")
        p = 1 + rng.below((1 << low) - 1)
        idx = _sample_distinct(rng, 1 << d, k)
        points = [_subspace_element(i, n, d) | p for i in idx]
    else:
        if k > (1 << n) - (1 << d):
            raise ValueError("not enough room outside V")
        points = _sample_distinct(rng, 1 << n, k, accept=lambda x: x & ((1 << low) - 1) != 0)
    return F2Set(n, V + points)


def gen_random(n: int, m: int, seed: int) -> F2Set:
    """m distinct uniformly seeded elements of F_2^n."""
    _check_n(n)
    if not 1 <= m <= 1 << n:
        raise ValueError(f"need 1 <= m <= 2^n, got m={m}")
    return F2Set(n, _sample_distinct(SplitMix64(seed), 1 << n, m))


FAMILIES: dict[str, Callable[..., F2Set]] = {
    "weight-one-prefix": gen_weight_one_prefix,
    "subspace": gen_subspace,
    "dense-subspace-sample": gen_dense_subspace_sample,
    "subspace-plus-points": gen_subspace_plus_points,
    "random": gen_random,
}

SEEDED = {"dense-subspace-sample", "subspace-plus-points", "random"}


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict[str, Any] = field(default_factory=dict)

    def build(self) -> F2Set:
        try:
            fn = FAMILIES[self.family]
        except KeyError:
            raise ValueError(f"unknown family {self.family!r}; choose from {sorted(FAMILIES)}") from None
        if self.family in SEEDED and "seed" not in self.params:
            raise ValueError(f"family {self.family!r} requires a seed")
        return fn(**self.params)
