"""Unstructured-case extraction: typical set, BSG step, component graph.

Pipeline for a set A with |2A| = K|A| and heavy-fiber parameter L:

1. gate: Pr[|A(a1 + a2)| >= L|A|/K] <= K^-8
2. C = {s : |A|/2K <= |A(s)| <= L|A|/K}
3. gate: Pr[gamma_1 + gamma_2 in 2A] over C^2 at least the energy floor
4. C' ⊆ C with small doubling (constructive BSG substitute)
5. graph on A with edges a1 ~ a2 iff a1 + a2 in C'; B = largest component
6. certify 2B ⊆ span(C') and span(B) <= 2 span(2B) <= 2 span(C')
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .exact import ceil_fraction, pow_cmp
from .gf2core import F2Set, SpanBasis, _same_dim, pair_xor_blocks, span_basis, sumset, sumset_span_basis
from .report import NOT_ASSERTED, CheckResult
from .stats import (
    CapExceeded,
    Rational,
    SymmetryProfile,
    _profile,
    large_fiber_probability,
    symmetry_profile,
)

BSG_CAP = 8192
BSG_PIVOTS = 8


class EnergyGateError(ValueError):
    pass


@dataclass
class TypicalSet:
    C: F2Set
    lower: Fraction
    upper: Fraction
    density: Fraction
    check: CheckResult


@dataclass
class BSGResult:
    C_prime: F2Set
    energy: Fraction
    energy_bound: Fraction
    size_ratio: Fraction
    doubling_ratio: Fraction
    doubling_guarantee: Fraction
    degree_threshold: Fraction
    common_threshold: Fraction
    pivot: Any
    check: CheckResult


@dataclass
class ComponentGraph:
    vertex_count: int
    edge_count: int
    component_sizes: list[int]
    labels: np.ndarray = field(repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "vertex_count": self.vertex_count,
            "edge_count": self.edge_count,
            "component_count": len(self.component_sizes),
            "component_sizes": self.component_sizes,
        }


@dataclass
class ExtractionReport:
    mode: str
    inputs: dict[str, Any]
    B: F2Set | None = None
    witnesses: dict[str, Any] = field(default_factory=dict)
    gates: list[CheckResult] = field(default_factory=list)
    checks: list[CheckResult] = field(default_factory=list)
    forced: bool = False
    stopped_at: str | None = None

    @property
    def gate_failed(self) -> bool:
        return any(g.failed for g in self.gates)

    @property
    def check_failed(self) -> bool:
        return any(c.failed for c in self.checks)

    @property
    def status(self) -> str:
        if self.gate_failed and not self.forced:
            return "gate_failure"
        if self.check_failed or self.stopped_at:
            return "check_failure"
        return "pass"

    def check(self, name: str) -> CheckResult:
        for c in self.gates + self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "status": self.status,
            "forced": self.forced,
            "stopped_at": self.stopped_at,
            "inputs": self.inputs,
            "B": self.B,
            "witnesses": self.witnesses,
            "gates": self.gates,
            "checks": self.checks,
        }


def typical_set(A: F2Set, L: Rational, profile: SymmetryProfile | None = None) -> TypicalSet:
    """C = {s in 2A : |A|/2K <= |A(s)| <= L|A|/K} and its density in 2A."""
    prof = _profile(A, profile)
    L = Fraction(L)
    lower = Fraction(prof.size ** 2, 2 * prof.sumset_size)
    upper = L * prof.size ** 2 / prof.sumset_size
    lo, hi = ceil_fraction(lower), upper.numerator // upper.denominator
    keep = (prof.counts >= lo) & (prof.counts <= hi)
    C = F2Set._from_sorted_array(A.dim, prof.sums[keep])
    density = Fraction(len(C), prof.sumset_size)
    bound = 1 / (4 * L)
    hypothesis = prof.K >= 2 and large_fiber_probability(A, L, prof) * prof.K ** 8 <= 1
    values = dict(density=density, bound=bound, K=prof.K, L=L)
    if hypothesis:
        check = CheckResult.of("typical_density", density >= bound, **values)
    else:
        check = CheckResult("typical_density", NOT_ASSERTED, values,
                            "needs K >= 2 and the heavy-fiber hypothesis")
    return TypicalSet(C, lower, upper, density, check)


def pair_energy(C: F2Set, S: F2Set) -> Fraction:
    """Pr over (gamma_1, gamma_2) in C^2 that gamma_1 + gamma_2 lies in S."""
    _same_dim(C, S)
    if len(C) == 0:
        raise ValueError("C is empty")
    hits = 0
    for block in pair_xor_blocks(C.array, C.array):
        hits += int(np.count_nonzero(S.contains_many(block)))
    return Fraction(hits, len(C) ** 2)


def _prune_to_clique(good: np.ndarray) -> np.ndarray:
    """Greedily drop the vertex with the most bad partners until every pair
    is good. Returns a boolean keep-mask; ties drop the later vertex."""
    keep = np.ones(good.shape[0], dtype=bool)
    bad = (~good).sum(axis=1)
    while True:
        live_bad = np.where(keep, bad, -1)
        worst = int(live_bad.max())
        if worst <= 0:
            return keep
        v = int(np.flatnonzero(live_bad == worst)[-1])
        keep[v] = False
        bad -= ~good[:, v]


def bsg_extract(C: F2Set, S: F2Set, energy_lower_bound: Rational) -> BSGResult:
    """Large C' ⊆ C with |C' + C'| small, given many pairs of C summing into S.

    With e0 the energy bound:

    * keep C1 = {gamma : deg(gamma) >= e0|C|/2} in the graph gamma ~ gamma'
      iff gamma + gamma' in S;
    * for a pivot v in C1 (the 8 highest-degree candidates are tried), take
      X = N(v) ∩ C1 and call x, y in X good if they have at least e0^2|C|/8
      common neighbors;
    * prune X greedily until all pairs are good.

    Every x + y with x, y in C' then has at least e0^2|C|/8 representations
    as s1 + s2 with s1, s2 in S, so |C' + C'| <= 8 |S|^2 / (e0^2 |C|), i.e. the
    doubling ratio |C' + C'|/|C| is at most 8 (|S|/|C|)^2 / e0^2. The size ratio
    is measured and reported, not guaranteed.
    """
    _same_dim(C, S)
    e0 = Fraction(energy_lower_bound)
    if e0 <= 0:
        raise ValueError("energy bound must be positive")
    m = len(C)
    if m == 0:
        raise ValueError("C is empty")
    if m > BSG_CAP:
        raise CapExceeded(f"bsg_extract needs |C| <= {BSG_CAP}, got {m}")
    energy = pair_energy(C, S)
    if energy < e0:
        raise EnergyGateError(f"pair energy {energy} below bound {e0}")
    deg_cut = e0 * m / 2
    common_cut = e0 ** 2 * m / 8
    sigma = Fraction(len(S), m)
    guarantee = 8 * sigma ** 2 / e0 ** 2

    arr = C.array
    if energy == 1:
        keep_idx, pivot = np.arange(m), None
    else:
        adj = S.contains_many(np.bitwise_xor.outer(arr, arr))
        deg = adj.sum(axis=1)
        in_c1 = deg * 2 * e0.denominator >= e0.numerator * m
        order = sorted(np.flatnonzero(in_c1).tolist(), key=lambda i: (-int(deg[i]), i))
        best: np.ndarray | None = None
        pivot = None
        for v in order[:BSG_PIVOTS]:
            X = np.flatnonzero(adj[v] & in_c1)
            if X.size == 0:
                X = np.array([v])
            rows = adj[X].astype(np.float32)
            common = (rows @ rows.T).astype(np.int64)
            good = common * 8 * e0.denominator ** 2 >= e0.numerator ** 2 * m
            kept = X[_prune_to_clique(good)]
            if best is None or kept.size > best.size:
                best, pivot = kept, int(arr[v])
            if best.size == int(in_c1.sum()):
                break
        keep_idx = np.sort(best)
    Cp = F2Set._from_sorted_array(C.dim, arr[keep_idx])
    doubling_ratio = Fraction(len(sumset(Cp, Cp)), m)
    check = CheckResult.of(
        "bsg_doubling", doubling_ratio <= guarantee,
        doubling_ratio=doubling_ratio, guarantee=guarantee, size_ratio=Fraction(len(Cp), m),
    )
    return BSGResult(
        C_prime=Cp, energy=energy, energy_bound=e0, size_ratio=Fraction(len(Cp), m),
        doubling_ratio=doubling_ratio, doubling_guarantee=guarantee,
        degree_threshold=deg_cut, common_threshold=common_cut,
        pivot=pivot, check=check,
    )


def component_extract(A: F2Set, Cp: F2Set, profile: SymmetryProfile | None = None
                      ) -> tuple[F2Set, ComponentGraph]:
    """Largest component of the graph on A with a1 ~ a2 iff a1 + a2 in C'.

    Ties go to the component with the smallest minimum element. 0 in C' would
    only add self-loops and is ignored.
    """
    _same_dim(A, Cp)
    prof = _profile(A, profile)
    if len(Cp) and np.any(prof.lookup(Cp.array) == 0):
        bad = Cp.array[prof.lookup(Cp.array) == 0][0]
        raise ValueError(f"C' is not contained in 2A (e.g. {int(bad):0{A.dim}b})")
    arr = A.array
    m = arr.size
    src, dst = [], []
    for s in Cp.array:
        if s == 0:
            continue
        partner = arr ^ s
        hit = A.contains_many(partner)
        i = np.flatnonzero(hit)
        j = A.index_of(partner[hit])
        half = i < j
        src.append(i[half])
        dst.append(j[half])
    if src:
        src_a, dst_a = np.concatenate(src), np.concatenate(dst)
    else:
        src_a = dst_a = np.zeros(0, dtype=np.int64)
    graph = coo_matrix((np.ones(src_a.size, dtype=np.int8), (src_a, dst_a)), shape=(m, m)).tocsr()
    _, labels = connected_components(graph, directed=False)
    sizes = np.bincount(labels)
    first = np.full(sizes.size, m, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(m))
    # largest size, then smallest minimum element (arr is sorted)
    best = min(range(sizes.size), key=lambda c: (-int(sizes[c]), int(first[c])))
    B = F2Set._from_sorted_array(A.dim, arr[labels == best])
    G = ComponentGraph(
        vertex_count=m, edge_count=int(src_a.size),
        component_sizes=sorted((int(x) for x in sizes), reverse=True), labels=labels,
    )
    return B, G


def sumset_in_span(B: F2Set, basis: SpanBasis) -> CheckResult:
    """Every b1 + b2 with b1, b2 in B reduces to zero against ``basis``."""
    for block in pair_xor_blocks(B.array, B.array):
        rem = basis.reduce_many(block.ravel())
        if np.any(rem):
            k = int(np.flatnonzero(rem)[0])
            w = int(block.ravel()[k])
            return CheckResult.of("sumset_in_span", False, witness=f"{w:0{B.dim}b}",
                                  pairs=len(B) ** 2, span_rank=basis.rank)
    return CheckResult.of("sumset_in_span", True, pairs=len(B) ** 2, span_rank=basis.rank)


def affine_span_check(B: F2Set) -> CheckResult:
    """span(B) <= 2 span(2B), since span(B) = span({b} ∪ (b + B))."""
    sb = span_basis(B).size
    s2b = sumset_span_basis(B).size
    return CheckResult.of("affine_span", sb <= 2 * s2b, span_B=sb, span_2B=s2b)


def default_energy_floor(L: Rational) -> Fraction:
    """1/(3072 L^6): the second-moment constant 1/(16^2 * 6) = 1/1536 for
    Pr[Z > 0], halved for the heavy-tuple correction, then divided by L^2
    for splitting tuples into pairs."""
    return Fraction(1, 3072) / Fraction(L) ** 6


def unstructured_pipeline(A: F2Set, L: Rational, force: bool = False,
                          energy_floor: Rational | None = None,
                          profile: SymmetryProfile | None = None,
                          threads: int = 1) -> ExtractionReport:
    L = Fraction(L)
    if L <= 0:
        raise ValueError("L must be positive")
    prof = profile if profile is not None else symmetry_profile(A, threads=threads)
    K = prof.K
    rep = ExtractionReport("unstructured", {"A": A, "L": L, "K": K, "size": len(A),
                                            "sumset_size": prof.sumset_size}, forced=force)

    if K == 1:
        # A is a coset of a subspace; it is its own answer
        rep.B = A
        rep.witnesses["fast_path"] = "K = 1"
        rep.checks.append(affine_span_check(A))
        rep.witnesses["span_B"] = span_basis(A).size
        return rep

    p = large_fiber_probability(A, L, prof)
    rep.gates.append(CheckResult.of("eq2_hypothesis", p * K ** 8 <= 1,
                                    heavy_probability=p, bound=1 / K ** 8))
    if rep.gate_failed and not force:
        rep.stopped_at = "eq2_hypothesis"
        return rep

    ts = typical_set(A, L, prof)
    rep.witnesses["C"] = ts.C
    rep.witnesses["typical_thresholds"] = {"lower": ts.lower, "upper": ts.upper}
    rep.checks.append(ts.check)
    if len(ts.C) == 0:
        rep.checks.append(CheckResult.of("typical_nonempty", False))
        rep.stopped_at = "typical_set"
        return rep

    S = prof.sumset()
    energy = pair_energy(ts.C, S)
    floor = Fraction(energy_floor) if energy_floor is not None else default_energy_floor(L)
    rep.gates.append(CheckResult.of("energy_gate", energy >= floor, energy=energy, floor=floor))
    if energy < floor:
        if not force or energy == 0:
            rep.stopped_at = "energy_gate"
            return rep
        floor = energy

    bsg = bsg_extract(ts.C, S, floor)
    Cp = bsg.C_prime
    rep.witnesses["C_prime"] = Cp
    rep.witnesses["bsg"] = {
        "energy": bsg.energy, "energy_bound": bsg.energy_bound,
        "size_ratio": bsg.size_ratio, "doubling_ratio": bsg.doubling_ratio,
        "doubling_guarantee": bsg.doubling_guarantee, "pivot": bsg.pivot,
    }
    rep.checks.append(bsg.check)

    B, G = component_extract(A, Cp, prof)
    rep.B = B
    rep.witnesses["graph"] = G
    edge_mass = int(prof.lookup(Cp.array[Cp.array != 0]).sum())
    rep.checks.append(CheckResult.of("edge_count_identity", 2 * G.edge_count == edge_mass,
                                     edges=G.edge_count, fiber_mass=edge_mass))
    rep.checks.append(CheckResult.of(
        "largest_component_bound", len(B) * len(A) >= 2 * G.edge_count,
        largest=len(B), bound=Fraction(2 * G.edge_count, len(A)),
    ))

    cp_basis = span_basis(Cp) if len(Cp) else SpanBasis(A.dim)
    rep.checks.append(sumset_in_span(B, cp_basis))
    rep.checks.append(affine_span_check(B))

    span_B = span_basis(B).size
    span_2B = sumset_span_basis(B).size
    span_Cp = cp_basis.size
    Kp = Fraction(len(sumset(Cp, Cp)), len(Cp))
    ceil_bound = 2 * (1 << ceil_fraction(2 * Kp)) * len(Cp)
    exact_ok = pow_cmp(Fraction(span_B, 2 * len(Cp)), 1, 2, 2 * Kp) <= 0
    rep.checks.append(CheckResult.of(
        "span_certificate", span_B <= 2 * span_2B <= 2 * span_Cp and exact_ok,
        span_B=span_B, span_2B=span_2B, span_C_prime=span_Cp,
        C_prime_doubling=Kp, bound=ceil_bound, exact_bound_holds=exact_ok,
    ))
    rep.witnesses.update(
        B_size_ratio=Fraction(len(B), len(A)), span_B=span_B, span_2B=span_2B,
        span_C_prime=span_Cp, typical_size=len(ts.C),
    )
    return rep
