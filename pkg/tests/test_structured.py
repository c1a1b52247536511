from fractions import Fraction

import pytest

from conftest import S
from f2pfr.exact import pow_cmp
from f2pfr.generators import gen_subspace, gen_subspace_plus_points, gen_weight_one_prefix
from f2pfr.gf2core import F2Set
from f2pfr.report import NOT_ASSERTED
from f2pfr.stats import symmetry_profile
from f2pfr.structured import (
    FINDING,
    ChainError,
    chain_select,
    containment_checks,
    k_to_minus_eps,
    level_set,
    scan_astar,
    structured_B,
    structured_pipeline,
)


def test_k_to_minus_eps_is_upper_bound():
    d = k_to_minus_eps(Fraction(4, 3), 3)
    assert pow_cmp(d, 1, Fraction(3, 4), 3) >= 0
    assert d - Fraction(27, 64) <= Fraction(1, 2 ** 64)
    assert k_to_minus_eps(4, Fraction(1, 2)) == Fraction(1, 2)


def test_level_sets_tri(tri):
    assert level_set(tri, Fraction(1, 4)).S == S("00")
    assert level_set(tri, Fraction(1, 2)).S == S("00", "01", "10", "11")
    assert level_set(tri, 1).S == S("00", "01", "10", "11")
    with pytest.raises(ValueError):
        level_set(tri, Fraction(3, 2))


def test_structured_B_subspace_plus_point():
    A = gen_subspace_plus_points(12, 11, 1, 5)
    sb = structured_B(A, 0, 11)
    assert sb.B == gen_subspace(12, 11)
    assert sb.eps_hypothesis
    assert sb.min_L is not None and pow_cmp(Fraction(len(A), 2048), 1, symmetry_profile(A).K, sb.min_L) <= 0


def test_eps_hypothesis_uses_base_two():
    A = gen_subspace_plus_points(12, 11, 1, 5)
    K = symmetry_profile(A).K
    assert K == Fraction(4096, 2049)
    # K^10 < 2^10, so eps = 10 is not enough
    assert not structured_B(A, 0, 10).eps_hypothesis


def test_scan_picks_maximizer():
    A = gen_subspace_plus_points(12, 11, 1, 5)
    found = scan_astar(A, 11)
    assert found["count"] == 2048 and found["a_star"].bits == 0


def test_containment_finding_is_not_a_failure():
    A = gen_weight_one_prefix(4, 4)
    res = containment_checks(A, F2Set(4, []), 2, [Fraction(3, 4), Fraction(1, 4)])
    parts = res.values["parts"]
    assert res.passed and res.values["findings"] == 1
    assert parts[0].status == FINDING and parts[0].witness == "1111"
    assert parts[1].passed


def test_chain_select_example():
    A = gen_subspace_plus_points(12, 11, 1, 5)
    c = chain_select(A, 11, 1)
    assert c.r == 10 and c.sizes == [2048] * 11
    assert c.chosen_j == 1 and c.chosen_ratio == 1
    assert c.bound_exponent == 2 and c.bound == 4 * 4096
    names = {x.name: x.status for x in c.checks}
    assert names["pigeonhole"] == "pass"
    assert names["ratio_vs_4_pow_L_over_eps"] == NOT_ASSERTED


def test_chain_too_short(tri):
    with pytest.raises(ChainError):
        chain_select(tri, 1, 1)


def test_chain_needs_doubling():
    with pytest.raises(ChainError):
        chain_select(gen_subspace(5, 3), 4, 1)


@pytest.mark.parametrize("d,k,seed,eps,L", [
    (4, 1, 0, 4, 1), (4, 2, 1, 4, 1), (8, 3, 2, 8, 2), (10, 5, 0, 6, Fraction(1, 2)),
])
def test_chain_checks_hold(d, k, seed, eps, L):
    A = gen_subspace_plus_points(d + 3, d, k, seed, seed % 2 == 1)
    c = chain_select(A, eps, L)
    assert not any(x.failed for x in c.checks)
    assert all(x <= y for x, y in zip(c.sizes, c.sizes[1:]))


class TestPipeline:
    def test_passes_on_subspace_plus_point(self):
        A = gen_subspace_plus_points(12, 11, 1, 5)
        rep = structured_pipeline(A, None, 11, 1, scan=True)
        assert rep.status == "pass" and len(rep.B) == 2048
        assert rep.check("span_certificate").passed

    def test_gate_failure(self):
        A = gen_subspace_plus_points(12, 11, 2, 0)
        rep = structured_pipeline(A, None, 11, 1, scan=True)
        assert rep.status == "gate_failure" and rep.stopped_at == "gates"

    def test_force(self):
        A = gen_subspace_plus_points(12, 11, 2, 0)
        rep = structured_pipeline(A, None, 11, 1, scan=True, force=True)
        assert rep.forced and rep.status in {"pass", "check_failure"}
        assert rep.check("containments").passed

    def test_coset_fast_path(self):
        V = gen_subspace(6, 4)
        rep = structured_pipeline(V, 0, 2, 1)
        assert rep.status == "pass" and rep.B == V

    def test_needs_astar(self):
        with pytest.raises(ValueError):
            structured_pipeline(gen_subspace_plus_points(6, 4, 1, 0), None, 4, 1)
