"""Symmetry-set statistics and the second-moment machinery.

Write f(s) = |A(s)| = |A ∩ (s + A)|, the number of ordered pairs (a1, a2) in
A^2 with a1 + a2 = s. With beta_1..beta_4 uniform in A:

    Y = |A(beta_1 + beta_2) ∩ A(beta_3 + beta_4)|
    Z = 0 if either fiber has size <= |A|/2K, else Y

All probabilities and expectations are returned as exact fractions.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Union

import numpy as np

from .exact import ceil_fraction, pow_cmp
from .gf2core import (
    DENSE_DIM,
    TABLE_DIM,
    F2Set,
    F2Vector,
    Element,
    _as_bits,
    _nonempty,
    pair_xor_blocks,
    span_basis,
)
from .report import NOT_ASSERTED, CheckResult

BRUTE_CAP = 24          # |A| for quadruple enumeration
LEMMA4_CAP = 2048       # |A| for the O(|A|^3) count-identity path
FIBER_PAIR_CAP = 4096   # |2A| for exact Pr[Z > 0]
BIJECTION_CAP = 256     # |A| for materializing the two pair sets

Rational = Union[int, Fraction, str]


class CapExceeded(ValueError):
    """An exact computation was refused because the instance is too large."""


# --- profiles ---------------------------------------------------------------

def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform of a length-2^n integer vector."""
    a = np.array(values, dtype=np.int64, copy=True)
    size = a.size
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < size:
        a = a.reshape(-1, 2, h)
        x = a[:, 0, :]
        y = a[:, 1, :]
        a = np.stack((x + y, x - y), axis=1)
        h *= 2
    return a.reshape(size)


@dataclass(frozen=True, eq=False)
class SymmetryProfile:
    """s -> |A(s)| for every s in 2A, as two parallel sorted arrays."""

    base: F2Set
    sums: np.ndarray
    counts: np.ndarray

    @property
    def size(self) -> int:
        return len(self.base)

    @property
    def sumset_size(self) -> int:
        return int(self.sums.size)

    @property
    def K(self) -> Fraction:
        return Fraction(self.sumset_size, self.size)

    @property
    def mass(self) -> int:
        return int(self.counts.sum(dtype=np.int64))

    @property
    def mean(self) -> Fraction:
        return Fraction(self.mass, self.sumset_size)

    def sumset(self) -> F2Set:
        return F2Set._from_sorted_array(self.base.dim, self.sums)

    @cached_property
    def _table(self) -> np.ndarray | None:
        if self.base.dim > DENSE_DIM:
            return None
        table = np.zeros(1 << self.base.dim, dtype=self.counts.dtype)
        table[self.sums] = self.counts
        return table

    def lookup(self, values: np.ndarray) -> np.ndarray:
        """|A(s)| for an array of s; zero outside 2A."""
        values = np.asarray(values, dtype=np.uint64)
        if self._table is not None:
            return self._table[values]
        pos = np.minimum(np.searchsorted(self.sums, values), self.sums.size - 1)
        return np.where(self.sums[pos] == values, self.counts[pos], 0)

    def fiber(self, s: Element) -> int:
        sb = _as_bits(s, self.base.dim)
        return int(self.lookup(np.array([sb], dtype=np.uint64))[0])

    def fibers(self) -> dict[int, int]:
        return {int(s): int(c) for s, c in zip(self.sums, self.counts)}

    def histogram(self) -> dict[int, int]:
        sizes, mult = np.unique(self.counts, return_counts=True)
        return {int(a): int(b) for a, b in zip(sizes, mult)}

    def same_as(self, other: "SymmetryProfile") -> bool:
        return (
            self.base == other.base
            and np.array_equal(self.sums, other.sums)
            and np.array_equal(self.counts, other.counts)
        )

    # exact thresholds as integer cut points on fiber sizes

    def low_cut(self) -> int:
        """Largest fiber size f with f <= |A|/2K."""
        t = Fraction(self.size ** 2, 2 * self.sumset_size)
        return t.numerator // t.denominator

    def heavy_cut(self, L: Rational) -> int:
        """Smallest fiber size f with f >= L|A|/K."""
        return ceil_fraction(Fraction(L) * self.size ** 2 / self.sumset_size)


def _naive_counts(A: F2Set, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    arr = A.array
    blocks = list(pair_xor_blocks(arr, arr))
    if A.dim <= TABLE_DIM:
        size = 1 << A.dim

        def count(block: np.ndarray) -> np.ndarray:
            return np.bincount(block.ravel().astype(np.int64), minlength=size)

        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                parts = list(pool.map(count, blocks))
        else:
            parts = [count(b) for b in blocks]
        total = np.sum(parts, axis=0, dtype=np.int64)
        sums = np.flatnonzero(total)
        return sums.astype(np.uint64), total[sums]
    merged: dict[int, int] = {}
    for block in blocks:
        vals, cnt = np.unique(block, return_counts=True)
        for v, c in zip(vals.tolist(), cnt.tolist()):
            merged[v] = merged.get(v, 0) + c
    keys = sorted(merged)
    return np.array(keys, dtype=np.uint64), np.array([merged[k] for k in keys], dtype=np.int64)


def _wht_counts(A: F2Set) -> tuple[np.ndarray, np.ndarray]:
    n = A.dim
    spectrum = fwht(A.indicator())
    corr = fwht(spectrum * spectrum)
    if np.any(corr & ((1 << n) - 1)):
        raise ArithmeticError("autocorrelation not divisible by 2^n")
    corr >>= n
    sums = np.flatnonzero(corr)
    return sums.astype(np.uint64), corr[sums]


def symmetry_profile(A: F2Set, method: str = "auto", threads: int = 1) -> SymmetryProfile:
    """Exact |A(s)| for all s in 2A.

    ``naive`` enumerates all ordered pairs; ``wht`` squares the Walsh-Hadamard
    spectrum of the indicator of A and transforms back (n <= 24). ``auto``
    picks ``wht`` whenever it is allowed.
    """
    _nonempty(A)
    if method == "auto":
        method = "wht" if A.dim <= TABLE_DIM else "naive"
    if method == "naive":
        sums, counts = _naive_counts(A, threads)
    elif method == "wht":
        if A.dim > TABLE_DIM:
            raise CapExceeded(f"wht needs n <= {TABLE_DIM}, got n = {A.dim}")
        sums, counts = _wht_counts(A)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SymmetryProfile(A, sums, counts.astype(np.int64))


def _profile(A: F2Set, profile: SymmetryProfile | None) -> SymmetryProfile:
    if profile is None:
        return symmetry_profile(A)
    if profile.base != A:
        raise ValueError("profile belongs to a different set")
    return profile


# --- fiber probabilities ----------------------------------------------------

def large_fiber_probability(A: F2Set, L: Rational, profile: SymmetryProfile | None = None) -> Fraction:
    """Pr over (a1, a2) in A^2 that |A(a1 + a2)| >= L|A|/K."""
    prof = _profile(A, profile)
    heavy = prof.counts >= prof.heavy_cut(L)
    return Fraction(int(prof.counts[heavy].sum()), prof.size ** 2)


def uniform_fiber_probability(A: F2Set, L: Rational, profile: SymmetryProfile | None = None) -> Fraction:
    """Pr over s uniform in 2A that |A(s)| >= L|A|/K."""
    prof = _profile(A, profile)
    return Fraction(int(np.count_nonzero(prof.counts >= prof.heavy_cut(L))), prof.sumset_size)


def small_fiber_probability(A: F2Set, profile: SymmetryProfile | None = None) -> Fraction:
    """Pr over (beta_1, beta_2) in A^2 that |A(beta_1 + beta_2)| <= |A|/2K."""
    prof = _profile(A, profile)
    light = prof.counts <= prof.low_cut()
    return Fraction(int(prof.counts[light].sum()), prof.size ** 2)


def eq2_holds(A: F2Set, L: Rational, profile: SymmetryProfile | None = None) -> bool:
    """Pr[|A(a1 + a2)| >= L|A|/K] <= K^-8."""
    prof = _profile(A, profile)
    return large_fiber_probability(A, L, prof) * prof.K ** 8 <= 1


def conversion_check(A: F2Set, L: Rational, profile: SymmetryProfile | None = None) -> CheckResult:
    """Pair probability of a heavy fiber is at most K times its uniform probability."""
    prof = _profile(A, profile)
    pair = large_fiber_probability(A, L, prof)
    unif = uniform_fiber_probability(A, L, prof)
    return CheckResult.of(
        "pair_vs_uniform", pair <= prof.K * unif,
        pair_probability=pair, uniform_probability=unif, K=prof.K, L=Fraction(L),
    )


# --- moments ----------------------------------------------------------------

def _guarded_row_sums(prof: SymmetryProfile) -> np.ndarray:
    """N(a) = sum over c in A of f(a + c), counting only fibers > |A|/2K."""
    arr = prof.base.array
    cut = prof.low_cut()
    out = []
    for block in pair_xor_blocks(arr, arr):
        f = prof.lookup(block)
        out.append(np.where(f > cut, f, 0).sum(axis=1))
    return np.concatenate(out)


def expectation_Z(A: F2Set, profile: SymmetryProfile | None = None) -> Fraction:
    """Exact E[Z] via E[Z] = sum_a q(a)^2.

    q(a) = Pr[a in A(beta_1 + beta_2) and |A(beta_1 + beta_2)| > |A|/2K]
    = N(a) / |A|^2, and the two halves of the quadruple are independent.
    """
    prof = _profile(A, profile)
    N = _guarded_row_sums(prof)
    total = sum(int(x) * int(x) for x in N.tolist())
    return Fraction(total, prof.size ** 4)


def _pair_counts(prof: SymmetryProfile) -> np.ndarray:
    """|A|^2 * Pr[{a1, a2} ⊆ A(beta_1 + beta_2)] for all (a1, a2), via
    sum over c1 in A(a1 + a2) of |A(a1 + c1)|."""
    A = prof.base
    arr = A.array
    m = arr.size
    out = np.empty((m, m), dtype=np.int64)
    step = max(1, (1 << 20) // m)
    for i, a1 in enumerate(arr):
        t = arr ^ a1                    # a1 + a2 for a2 in A, also a1 + c for c in A
        w = prof.lookup(t)              # |A(a1 + c)|
        for start in range(0, m, step):
            rows = t[start:start + step]
            # c in A(a1 + a2)  <=>  c + a1 + a2 in A
            member = A.contains_many(np.bitwise_xor.outer(rows, arr)).astype(np.int64)
            out[i, start:start + rows.size] = member @ w
    return out


def expectation_Y2(A: F2Set, method: str = "lemma4", profile: SymmetryProfile | None = None) -> Fraction:
    """Exact E[Y^2].

    ``lemma4`` sums Pr[{a1, a2} ⊆ A(beta_1 + beta_2)]^2 over (a1, a2) using the
    pair-count identity; ``brute`` enumerates all |A|^4 quadruples;
    ``fiber_pairs`` weights fiber intersections, fast while |2A| is small.
    ``auto`` takes fiber_pairs when |2A| allows and lemma4 otherwise.
    """
    if method == "brute":
        return brute_moments(A)["E_Y2"]
    prof = _profile(A, profile)
    if method == "auto":
        method = "fiber_pairs" if prof.sumset_size <= FIBER_PAIR_CAP else "lemma4"
    if method == "fiber_pairs":
        if prof.sumset_size > FIBER_PAIR_CAP:
            raise CapExceeded(f"fiber pairs need |2A| <= {FIBER_PAIR_CAP}, got {prof.sumset_size}")
        return Fraction(_fiber_pair_moments(prof)["E_Y2"], prof.size ** 4)
    if method != "lemma4":
        raise ValueError(f"unknown method {method!r}")
    if prof.size > LEMMA4_CAP:
        raise CapExceeded(f"lemma4 path needs |A| <= {LEMMA4_CAP}, got {prof.size}")
    P = _pair_counts(prof)
    total = sum(int(x) * int(x) for x in P.ravel().tolist())
    return Fraction(total, prof.size ** 4)


def brute_moments(A: F2Set) -> dict[str, Fraction]:
    """E[Z], E[Z^2], E[Y^2] and Pr[Z > 0] by enumerating every quadruple.

    Independent of the profile code: fibers are rebuilt as bitmasks over the
    positions of A and intersected with popcounts.
    """
    _nonempty(A)
    m = len(A)
    if m > BRUTE_CAP:
        raise CapExceeded(f"quadruple enumeration needs |A| <= {BRUTE_CAP}, got {m}")
    members = set(A.bits)
    masks = []
    for b1 in A.bits:
        for b2 in A.bits:
            s = b1 ^ b2
            masks.append(sum(1 << k for k, a in enumerate(A.bits) if a ^ s in members))
    sumset_size = len({b1 ^ b2 for b1 in A.bits for b2 in A.bits})
    M = np.array(masks, dtype=np.uint64)
    fib = np.bitwise_count(M).astype(np.int64)
    # fiber > |A|/2K  <=>  2 |2A| f > |A|^2
    big = 2 * sumset_size * fib > m * m
    Y = np.bitwise_count(M[:, None] & M[None, :]).astype(np.int64)
    G = big[:, None] & big[None, :]
    Z = np.where(G, Y, 0)
    q = m ** 4
    return {
        "E_Z": Fraction(int(Z.sum()), q),
        "E_Z2": Fraction(int((Z * Z).sum()), q),
        "E_Y2": Fraction(int((Y * Y).sum()), q),
        "Pr_Z_pos": Fraction(int(np.count_nonzero(Z)), q),
    }


# --- pair-set bijection ----------------------------------------------------

def lemma4_bijection_check(A: F2Set, a1: Element, a2: Element,
                           profile: SymmetryProfile | None = None) -> CheckResult:
    """Materialize both pair sets of the count identity and verify the map
    (beta_1, beta_2) -> (a1 + beta_1 + beta_2, beta_2) is a bijection."""
    x1, x2 = _as_bits(a1, A.dim), _as_bits(a2, A.dim)
    if x1 not in A or x2 not in A:
        raise ValueError("a1 and a2 must be elements of A")
    if len(A) > BIJECTION_CAP:
        raise CapExceeded(f"bijection check needs |A| <= {BIJECTION_CAP}, got {len(A)}")
    members = set(A.bits)
    first = {
        (b1, b2) for b1 in A.bits for b2 in A.bits
        if x1 ^ b1 ^ b2 in members and x2 ^ b1 ^ b2 in members
    }
    second = {
        (c1, b2) for c1 in A.bits if c1 ^ x1 ^ x2 in members
        for b2 in A.bits if b2 ^ x1 ^ c1 in members
    }
    image = {(x1 ^ b1 ^ b2, b2) for b1, b2 in first}
    preimage = {(x1 ^ b2 ^ c1, b2) for c1, b2 in second}
    maps_into = image <= second
    injective = len(image) == len(first)
    inverse_into = preimage <= first
    prof = _profile(A, profile)
    identity = sum(prof.fiber(x1 ^ c1) for c1 in A.bits if c1 ^ x1 ^ x2 in members)
    ok = maps_into and injective and inverse_into and len(first) == len(second) == identity
    witness = None
    if not maps_into:
        witness = sorted(image - second)[:1]
    elif not inverse_into:
        witness = sorted(preimage - first)[:1]
    return CheckResult.of(
        "lemma8_bijection", ok, witness=witness,
        a1=F2Vector(x1, A.dim), a2=F2Vector(x2, A.dim),
        first_size=len(first), second_size=len(second), count_identity=identity,
        maps_into=maps_into, injective=injective, inverse_maps_into=inverse_into,
    )


# --- Pr[Z > 0] --------------------------------------------------------------

@dataclass
class MomentReport:
    size: int
    K: Fraction
    E_Z: Fraction
    E_Z2: Fraction
    E_Y2: Fraction
    Pr_Z_pos: Fraction
    paley_zygmund_lower: Fraction
    low_threshold: Fraction
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(c.failed for c in self.checks)


def _fiber_pair_moments(prof: SymmetryProfile) -> dict[str, int]:
    """Numerators (over |A|^4) of E[Z], E[Z^2], E[Y^2], Pr[Z > 0] by
    enumerating fiber pairs (s1, s2) with weight f(s1) f(s2)."""
    A = prof.base
    arr = A.array
    sums = prof.sums
    f = prof.counts
    g = f > prof.low_cut()
    F = np.empty((sums.size, arr.size), dtype=np.float32)
    for start in range(0, sums.size, 256):
        F[start:start + 256] = A.contains_many(np.bitwise_xor.outer(sums[start:start + 256], arr))
    acc = {"E_Z": 0, "E_Z2": 0, "E_Y2": 0, "Pr_Z_pos": 0}
    fg = np.where(g, f, 0)
    for start in range(0, sums.size, 256):
        # counts <= |A| <= 2^24 are exact in float32
        inter = (F[start:start + 256] @ F.T).astype(np.int64)
        sq = inter * inter
        rows = f[start:start + 256]
        rows_g = np.where(g[start:start + 256], rows, 0)
        for i in range(inter.shape[0]):
            r, rg = int(rows[i]), int(rows_g[i])
            acc["E_Y2"] += r * int(sq[i] @ f)
            if rg:
                acc["E_Z"] += rg * int(inter[i] @ fg)
                acc["E_Z2"] += rg * int(sq[i] @ fg)
                acc["Pr_Z_pos"] += rg * int(fg[inter[i] > 0].sum())
    return acc


def pr_Z_positive(A: F2Set, profile: SymmetryProfile | None = None) -> MomentReport:
    """Exact Pr[Z > 0] with the Paley-Zygmund chain
    Pr[Z > 0] >= E[Z]^2/E[Z^2] >= E[Z]^2/E[Y^2]."""
    prof = _profile(A, profile)
    if prof.sumset_size > FIBER_PAIR_CAP:
        raise CapExceeded(f"Pr[Z > 0] needs |2A| <= {FIBER_PAIR_CAP}, got {prof.sumset_size}")
    q = prof.size ** 4
    raw = _fiber_pair_moments(prof)
    EZ = expectation_Z(A, prof)
    EZ2 = Fraction(raw["E_Z2"], q)
    EY2 = Fraction(raw["E_Y2"], q)
    pr = Fraction(raw["Pr_Z_pos"], q)
    pz = EZ ** 2 / EY2 if EY2 else Fraction(0)
    pz_z = EZ ** 2 / EZ2 if EZ2 else Fraction(0)
    checks = [
        CheckResult.of("closed_form_E_Z", Fraction(raw["E_Z"], q) == EZ,
                       closed_form=EZ, fiber_pairs=Fraction(raw["E_Z"], q)),
        CheckResult.of("E_Z2_le_E_Y2", EZ2 <= EY2, E_Z2=EZ2, E_Y2=EY2),
        CheckResult.of("paley_zygmund", pr >= pz_z, Pr_Z_pos=pr, bound=pz_z),
        CheckResult.of("eq6_chain", pr >= pz_z >= pz, Pr_Z_pos=pr, E_Z2_bound=pz_z, E_Y2_bound=pz),
    ]
    return MomentReport(
        size=prof.size, K=prof.K, E_Z=EZ, E_Z2=EZ2, E_Y2=EY2, Pr_Z_pos=pr,
        paley_zygmund_lower=pz, low_threshold=Fraction(prof.size ** 2, 2 * prof.sumset_size),
        checks=checks,
    )


# --- lemma-level checks -----------------------------------------------------

def mass_check(A: F2Set, profile: SymmetryProfile | None = None) -> CheckResult:
    prof = _profile(A, profile)
    ok = prof.mass == prof.size ** 2 and prof.mean == Fraction(prof.size) / prof.K
    return CheckResult.of("mass_identity", ok, mass=prof.mass, size_squared=prof.size ** 2,
                          mean=prof.mean, size_over_K=Fraction(prof.size) / prof.K)


def markov_check(A: F2Set, profile: SymmetryProfile | None = None) -> CheckResult:
    p = small_fiber_probability(A, profile)
    return CheckResult.of("small_fiber_markov", p <= Fraction(1, 2), probability=p, bound=Fraction(1, 2))


def lemma6_check(A: F2Set, profile: SymmetryProfile | None = None) -> CheckResult:
    """E[Z] >= |A|/(16 K^2)."""
    prof = _profile(A, profile)
    EZ = expectation_Z(A, prof)
    bound = Fraction(prof.size) / (16 * prof.K ** 2)
    return CheckResult.of("lemma6", EZ >= bound, E_Z=EZ, bound=bound)


def lemma7_check(A: F2Set, L: Rational, profile: SymmetryProfile | None = None,
                 method: str = "auto") -> CheckResult:
    """E[Y^2] <= 6 L^4 |A|^2 / K^4, asserted only when the heavy-fiber
    hypothesis Pr[|A(a1 + a2)| >= L|A|/K] <= K^-8 holds."""
    prof = _profile(A, profile)
    L = Fraction(L)
    p = large_fiber_probability(A, L, prof)
    EY2 = expectation_Y2(A, method, prof)
    bound = 6 * L ** 4 * prof.size ** 2 / prof.K ** 4
    values = dict(E_Y2=EY2, bound=bound, L=L, heavy_probability=p, hypothesis_bound=1 / prof.K ** 8)
    if p * prof.K ** 8 > 1:
        return CheckResult("lemma7", NOT_ASSERTED, values, "hypothesis not satisfied, bound not asserted")
    return CheckResult.of("lemma7", EY2 <= bound, **values)


def freiman_ruzsa_check(A: F2Set, profile: SymmetryProfile | None = None) -> CheckResult:
    """span(A) <= 2^(2K) |A|.

    Decided exactly by comparing (span/|A|) against 2^(2K) with rational
    exponents; the integer form span <= 2^ceil(2K) |A| is reported alongside.
    """
    prof = _profile(A, profile)
    K = prof.K
    rank = span_basis(A).rank
    span = 1 << rank
    exact_ok = pow_cmp(Fraction(span, prof.size), 1, 2, 2 * K) <= 0
    e = ceil_fraction(2 * K)
    ceil_bound = (1 << e) * prof.size
    vacuous = pow_cmp(Fraction(prof.size), 1, 2, A.dim - 2 * K) >= 0
    return CheckResult.of(
        "freiman_ruzsa", exact_ok and span <= ceil_bound,
        detail="bound vacuous at this scale" if vacuous else "",
        K=K, rank=rank, span=span, ceil_exponent=e, ceil_bound=ceil_bound,
        exact_holds=exact_ok, vacuous=vacuous,
    )
