"""Structured-case extraction: near-full fibers and the level-set chain.

S(delta) = {s in 2A : |A(s)| > |A|(1 - delta)}, clamped to 2A for delta >= 1.
Given a* and eps, B = {b in A : |A(a* + b)| > |A|(1 - K^-eps)}. Then
B + B ⊆ S(2K^-eps) and S(delta) + S(delta) ⊆ S(2 delta), so along the chain
delta_j = 2^j K^-eps some consecutive level sets grow slowly, which bounds
the doubling of S(delta_j) and hence the span of B.

K^-eps is replaced by ``delta0``, the smallest multiple of 2^-64 that is at
least K^-eps. Larger delta only enlarges B and every level set, and both
containments hold for any delta0, so this never weakens a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .exact import DEFAULT_PRECISION, ceil_log2_pow, floor_pow2, pow_cmp, rational_pow_upper
from .extract import ExtractionReport, affine_span_check
from .gf2core import F2Set, F2Vector, Element, _as_bits, pair_xor_blocks, span_basis, sumset, sumset_span_basis
from .report import NOT_ASSERTED, PASS, CheckResult
from .stats import Rational, SymmetryProfile, _profile

FINDING = "finding"


class ChainError(ValueError):
    pass


@dataclass
class LevelSet:
    delta: Fraction
    S: F2Set


@dataclass
class StructuredB:
    a_star: F2Vector
    eps: Fraction
    delta0: Fraction
    B: F2Set
    size_ratio: Fraction
    min_L: Fraction | None
    eps_hypothesis: bool


@dataclass
class ChainReport:
    eps: Fraction
    L: Fraction
    K: Fraction
    r: int
    delta0: Fraction
    deltas: list[Fraction]
    sizes: list[int]
    chosen_j: int | None
    chosen_ratio: Fraction | None
    selected: F2Set | None
    selected_doubling: Fraction | None
    span_selected: int | None
    bound_exponent: int
    bound: int
    vacuous: bool
    checks: list[CheckResult] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "eps": self.eps, "L": self.L, "K": self.K, "r": self.r, "delta0": self.delta0,
            "levels": [{"j": j, "delta": d, "size": n}
                       for j, (d, n) in enumerate(zip(self.deltas, self.sizes))],
            "chosen_j": self.chosen_j, "chosen_ratio": self.chosen_ratio,
            "selected_size": None if self.selected is None else len(self.selected),
            "selected_doubling": self.selected_doubling,
            "span_selected": self.span_selected,
            "bound_exponent": self.bound_exponent, "bound": self.bound,
            "vacuous": self.vacuous,
            "level_parameter": "K^-eps",
            "checks": self.checks,
        }


def k_to_minus_eps(K: Fraction, eps: Rational, precision: int = DEFAULT_PRECISION) -> Fraction:
    """Rational upper approximation of K^-eps."""
    return rational_pow_upper(1 / Fraction(K), Fraction(eps), precision)


def _level_cut(size: int, delta: Fraction) -> int:
    """Smallest fiber size f with f > size * (1 - delta)."""
    t = size * (1 - delta)
    return t.numerator // t.denominator + 1


def _level(prof: SymmetryProfile, delta: Fraction) -> F2Set:
    if delta >= 1:
        return prof.sumset()
    keep = prof.counts >= _level_cut(prof.size, delta)
    return F2Set._from_sorted_array(prof.base.dim, prof.sums[keep])


def level_set(A: F2Set, delta: Rational, profile: SymmetryProfile | None = None) -> LevelSet:
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    return LevelSet(delta, _level(_profile(A, profile), delta))


def _min_L(K: Fraction, size: int, b: int) -> Fraction | None:
    """Smallest multiple of 2^-16 with b >= K^-L * size."""
    if b == 0:
        return None
    if b >= size:
        return Fraction(0)
    guess = math.log(size / b) / math.log(float(K))
    L = Fraction(max(0, math.floor(guess * 2 ** 16) - 2), 2 ** 16)
    while pow_cmp(K, L, Fraction(size, b), 1) < 0:
        L += Fraction(1, 2 ** 16)
    return L


def structured_B(A: F2Set, a_star: Element, eps: Rational,
                 profile: SymmetryProfile | None = None) -> StructuredB:
    """B = {b in A : |A(a* + b)| > |A|(1 - K^-eps)}."""
    prof = _profile(A, profile)
    x = _as_bits(a_star, A.dim)
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    K = prof.K
    if K == 1:
        return StructuredB(F2Vector(x, A.dim), eps, Fraction(1), A, Fraction(1), Fraction(0), False)
    delta0 = k_to_minus_eps(K, eps)
    arr = A.array
    f = prof.lookup(arr ^ np.uint64(x))
    B = F2Set._from_sorted_array(A.dim, arr[f >= _level_cut(prof.size, delta0)])
    return StructuredB(
        a_star=F2Vector(x, A.dim), eps=eps, delta0=delta0, B=B,
        size_ratio=Fraction(len(B), prof.size), min_L=_min_L(K, prof.size, len(B)),
        # eps > 10/log2 K  <=>  K^eps > 2^10
        eps_hypothesis=pow_cmp(K, eps, 2, 10) > 0,
    )


def scan_astar(A: F2Set, eps: Rational, profile: SymmetryProfile | None = None) -> dict[str, Any]:
    """Pick a* in A maximizing |{a2 : |A(a* + a2)| > |A|(1 - K^-eps)}|.

    If a fraction p of pairs (a1, a2) has such a fiber, some a1 achieves at
    least p; the maximizer (smallest on ties) is that a1.
    """
    prof = _profile(A, profile)
    K = prof.K
    delta0 = Fraction(1) if K == 1 else k_to_minus_eps(K, eps)
    cut = _level_cut(prof.size, delta0)
    arr = A.array
    counts = []
    for block in pair_xor_blocks(arr, arr):
        counts.append((prof.lookup(block) >= cut).sum(axis=1))
    row = np.concatenate(counts)
    best = int(np.argmax(row))
    pair_fraction = Fraction(int(row.sum()), prof.size ** 2)
    s_fraction = Fraction(int(np.count_nonzero(prof.counts >= cut)), prof.sumset_size)
    return {
        "a_star": F2Vector(int(arr[best]), A.dim),
        "count": int(row[best]),
        "conditional_fraction": Fraction(int(row[best]), prof.size),
        "pair_fraction": pair_fraction,
        "sumset_fraction": s_fraction,
        "delta0": delta0,
    }


def _missing(X: F2Set, target: F2Set) -> int | None:
    miss = np.flatnonzero(~target.contains_many(X.array))
    return None if miss.size == 0 else int(X.array[miss[0]])


def containment_checks(A: F2Set, B: F2Set, eps: Rational, deltas: list[Rational],
                       profile: SymmetryProfile | None = None) -> CheckResult:
    """B + B ⊆ S(2 delta0) and S(delta) + S(delta) ⊆ S(2 delta) for each delta.

    A violation of the second containment with 2 delta > 1 (target clamped to
    2A) is recorded as a finding rather than a failure.
    """
    prof = _profile(A, profile)
    K = prof.K
    delta0 = Fraction(1) if K == 1 else k_to_minus_eps(K, eps)
    parts: list[CheckResult] = []
    if len(B):
        target = _level(prof, 2 * delta0)
        w = _missing(sumset(B, B), target)
        parts.append(CheckResult.of(
            "B_plus_B", w is None, witness=None if w is None else f"{w:0{A.dim}b}",
            delta=2 * delta0, B_size=len(B), target_size=len(target),
        ))
    # level sets are nested, so equal sizes mean equal sets
    doubled: dict[int, F2Set] = {}
    for d in deltas:
        d = Fraction(d)
        S = _level(prof, d)
        if len(S) == 0:
            parts.append(CheckResult.of("level_sum", True, delta=d, size=0))
            continue
        if len(S) not in doubled:
            doubled[len(S)] = sumset(S, S)
        target = _level(prof, 2 * d)
        w = _missing(doubled[len(S)], target)
        res = CheckResult.of(
            "level_sum", w is None, witness=None if w is None else f"{w:0{A.dim}b}",
            delta=d, size=len(S), target_size=len(target), clamped=2 * d >= 1,
        )
        if w is not None and 2 * d > 1:
            res.status = FINDING
            res.detail = "S(delta)+S(delta) leaves 2A once 2 delta > 1"
        parts.append(res)
    ok = not any(p.failed for p in parts)
    findings = [p for p in parts if p.status == FINDING]
    return CheckResult("containments", PASS if ok else "fail",
                       {"parts": parts, "findings": len(findings)})


def chain_select(A: F2Set, eps: Rational, L: Rational,
                 profile: SymmetryProfile | None = None) -> ChainReport:
    """Level sets along delta_j = 2^j K^-eps, j = 0..r, and the smallest
    j in 1..r-1 with |S(delta_{j+1})| <= K^((L+1)/(r-1)) |S(delta_j)|."""
    prof = _profile(A, profile)
    eps, L = Fraction(eps), Fraction(L)
    K = prof.K
    if K == 1:
        raise ChainError("K = 1: A is a coset, no chain needed")
    if eps <= 0 or L < 0:
        raise ValueError("need eps > 0 and L >= 0")
    # smallest r with 2^r >= K^eps / 2
    r = ceil_log2_pow(K, eps) - 1
    if r < 2:
        raise ChainError(f"chain too short: r = {r} < 2 (eps too small for K = {K})")
    delta0 = k_to_minus_eps(K, eps)
    deltas = [delta0 * 2 ** j for j in range(r + 1)]
    levels = [_level(prof, d) for d in deltas]
    sizes = [len(S) for S in levels]
    checks: list[CheckResult] = []

    checks.append(CheckResult.of("chain_length", pow_cmp(2, 2 * r, K, eps) >= 0,
                                 r=r, detail="r >= eps*log2(K)/2"))
    checks.append(CheckResult.of("chain_monotone", all(a <= b for a, b in zip(sizes, sizes[1:])),
                                 sizes=sizes))

    exponent = (L + 1) / (r - 1)
    chosen = None
    ratios: dict[int, Fraction] = {}
    for j in range(1, r):
        if sizes[j] == 0:
            continue
        ratios[j] = Fraction(sizes[j + 1], sizes[j])
        if chosen is None and pow_cmp(ratios[j], 1, K, exponent) <= 0:
            chosen = j
    start_ok = sizes[1] > 0 and pow_cmp(K, L, Fraction(prof.size, sizes[1]), 1) >= 0
    pig_values = dict(exponent=exponent, chosen_j=chosen, start_size=sizes[1],
                      end_size=sizes[r], start_bound_holds=start_ok)
    if start_ok:
        checks.append(CheckResult.of("pigeonhole", chosen is not None, **pig_values))
    else:
        checks.append(CheckResult("pigeonhole", NOT_ASSERTED, pig_values,
                                  "|S(2K^-eps)| < K^-L |A|: size hypothesis not met"))
    if chosen is None and ratios:
        chosen = min(ratios, key=lambda j: (ratios[j], j))

    ratio = ratios.get(chosen) if chosen is not None else None
    selected = levels[chosen] if chosen is not None else None
    sel_doubling = span_sel = None
    if selected is not None:
        sel_doubling = Fraction(len(sumset(selected, selected)), len(selected))
        checks.append(CheckResult.of("selected_doubling", sel_doubling <= ratio,
                                     doubling=sel_doubling, ratio=ratio))
        # K^((L+1)/(r-1)) <= 4^(L/eps) is what lets the ratio stand in for 4^(L/eps)
        if pow_cmp(K, exponent, 4, L / eps) <= 0:
            checks.append(CheckResult.of("ratio_vs_4_pow_L_over_eps",
                                         pow_cmp(ratio, 1, 4, L / eps) <= 0, ratio=ratio))
        else:
            checks.append(CheckResult("ratio_vs_4_pow_L_over_eps", NOT_ASSERTED, {"ratio": ratio},
                                      "K^((L+1)/(r-1)) exceeds 4^(L/eps) at this scale"))
        span_sel = span_basis(selected).size

    # bound 2^(2 * 4^(L/eps)) |2A| = 2^(2^(1 + 2L/eps)) |2A|, exponent floored
    cap = A.dim + 1
    e_floor = floor_pow2(1 + 2 * L / eps, cap)
    vacuous = e_floor >= cap
    bound = (1 << e_floor) * prof.sumset_size
    if span_sel is not None:
        checks.append(CheckResult.of("selected_span", span_sel <= bound, span=span_sel, bound=bound,
                                     vacuous=vacuous))
    return ChainReport(
        eps=eps, L=L, K=K, r=r, delta0=delta0, deltas=deltas, sizes=sizes,
        chosen_j=chosen, chosen_ratio=ratio, selected=selected, selected_doubling=sel_doubling,
        span_selected=span_sel, bound_exponent=e_floor, bound=bound, vacuous=vacuous,
        checks=checks,
    )


def structured_pipeline(A: F2Set, a_star: Element | None, eps: Rational, L: Rational,
                        force: bool = False, scan: bool = False,
                        profile: SymmetryProfile | None = None) -> ExtractionReport:
    prof = _profile(A, profile)
    eps, L = Fraction(eps), Fraction(L)
    K = prof.K
    rep = ExtractionReport("structured", {"A": A, "eps": eps, "L": L, "K": K, "size": len(A),
                                          "sumset_size": prof.sumset_size}, forced=force)
    if scan:
        found = scan_astar(A, eps, prof)
        rep.witnesses["scan"] = found
        a_star = found["a_star"]
    if a_star is None:
        raise ValueError("need a* or scan")
    rep.inputs["a_star"] = F2Vector(_as_bits(a_star, A.dim), A.dim)

    if K == 1:
        rep.B = A
        rep.witnesses["fast_path"] = "K = 1"
        span_B = span_basis(A).size
        rep.witnesses["span_B"] = span_B
        rep.checks.append(affine_span_check(A))
        rep.checks.append(CheckResult.of("span_certificate", span_B <= 2 * prof.sumset_size,
                                         span_B=span_B, bound=2 * prof.sumset_size))
        return rep

    sb = structured_B(A, a_star, eps, prof)
    B = sb.B
    rep.B = B
    rep.witnesses["B"] = {"delta0": sb.delta0, "size_ratio": sb.size_ratio, "min_L": sb.min_L}
    rep.gates.append(CheckResult.of("eps_hypothesis", sb.eps_hypothesis, eps=eps,
                                    detail="eps > 10/log2(K)"))
    size_ok = len(B) > 0 and pow_cmp(K, L, Fraction(len(A), len(B)), 1) >= 0
    rep.gates.append(CheckResult.of("B_size_hypothesis", size_ok, size=len(B),
                                    min_L=sb.min_L, L=L))
    if rep.gate_failed and not force:
        rep.stopped_at = "gates"
        return rep
    if len(B) == 0:
        rep.stopped_at = "empty_B"
        rep.checks.append(CheckResult.of("B_nonempty", False))
        return rep

    try:
        chain = chain_select(A, eps, L, prof)
    except ChainError as exc:
        rep.checks.append(CheckResult.of("chain", False, detail=str(exc)))
        rep.stopped_at = "chain"
        return rep
    rep.witnesses["chain"] = chain
    rep.checks.extend(chain.checks)
    rep.checks.append(containment_checks(A, B, eps, chain.deltas[1:], prof))

    span_B = span_basis(B).size
    span_2B = sumset_span_basis(B).size
    rep.checks.append(affine_span_check(B))
    in_level = _missing(sumset(B, B), chain.selected) is None if chain.selected is not None else False
    ok = (
        chain.span_selected is not None
        and in_level
        and span_B <= 2 * span_2B <= 2 * chain.span_selected
        and span_B <= chain.bound
    )
    rep.checks.append(CheckResult.of(
        "span_certificate", ok, span_B=span_B, span_2B=span_2B,
        span_selected=chain.span_selected, two_B_in_selected=in_level,
        bound=chain.bound, bound_exponent=chain.bound_exponent,
    ))
    rep.witnesses["span_B"] = span_B
    return rep
