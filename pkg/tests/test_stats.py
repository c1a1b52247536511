from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_fibers, brute_quadruples, f2sets
from f2pfr.generators import gen_dense_subspace_sample, gen_random, gen_subspace, gen_weight_one_prefix
from f2pfr.gf2core import F2Set
from f2pfr.report import NOT_ASSERTED
from f2pfr.stats import (
    CapExceeded,
    brute_moments,
    conversion_check,
    expectation_Y2,
    expectation_Z,
    freiman_ruzsa_check,
    fwht,
    large_fiber_probability,
    lemma4_bijection_check,
    lemma6_check,
    lemma7_check,
    markov_check,
    mass_check,
    pr_Z_positive,
    small_fiber_probability,
    symmetry_profile,
    uniform_fiber_probability,
)


def test_fwht_is_involution_up_to_scale():
    x = np.arange(16) - 5
    assert np.array_equal(fwht(fwht(x)), 16 * x)


class TestProfile:
    def test_subspace_constant(self):
        p = symmetry_profile(gen_subspace(5, 3))
        assert p.sumset_size == 8 and set(p.counts.tolist()) == {8}

    def test_tri(self, tri):
        p = symmetry_profile(tri)
        assert p.fibers() == {0: 3, 1: 2, 2: 2, 3: 2}
        assert p.mass == 9 and p.K == Fraction(4, 3)
        assert p.mean == Fraction(9, 4)

    @pytest.mark.parametrize("seed", range(100))
    def test_methods_agree(self, seed):
        n = 3 + seed % 10
        A = gen_random(n, 1 + (seed * 37) % min(200, 1 << n), seed)
        assert symmetry_profile(A, "naive").same_as(symmetry_profile(A, "wht"))

    @given(f2sets(max_dim=7))
    def test_matches_pair_enumeration(self, A):
        assert symmetry_profile(A, "naive").fibers() == brute_fibers(A)
        assert symmetry_profile(A, "wht").fibers() == brute_fibers(A)

    def test_threads_bit_identical(self):
        A = gen_random(12, 1500, 3)
        assert symmetry_profile(A, "naive", threads=3).same_as(symmetry_profile(A, "naive"))

    def test_naive_beyond_table_dim(self):
        A = F2Set(30, [0, 5, 1 << 29, (1 << 29) + 5, 77])
        assert symmetry_profile(A).fibers() == brute_fibers(A)
        with pytest.raises(CapExceeded):
            symmetry_profile(A, "wht")

    @given(f2sets(max_dim=8))
    def test_mass_and_mean(self, A):
        assert mass_check(A).passed


class TestFiberProbabilities:
    def test_subspace(self):
        V = gen_subspace(6, 3)
        assert large_fiber_probability(V, Fraction(3, 2)) == 0
        assert large_fiber_probability(V, 1) == 1
        assert uniform_fiber_probability(V, 1) == 1

    def test_tri(self, tri):
        # threshold L|A|/K = 9/2 for L = 2: no fiber reaches it
        assert large_fiber_probability(tri, 2) == 0
        # threshold 9/4 for L = 1: only s = 00
        assert uniform_fiber_probability(tri, 1) == Fraction(1, 4)
        assert large_fiber_probability(tri, 1) == Fraction(3, 9)

    @given(f2sets(max_dim=7), st.fractions(min_value=Fraction(1, 4), max_value=8, max_denominator=8))
    def test_pair_vs_uniform(self, A, L):
        assert conversion_check(A, L).passed

    @given(f2sets(max_dim=7))
    def test_markov(self, A):
        assert small_fiber_probability(A) <= Fraction(1, 2)
        assert markov_check(A).passed


class TestMoments:
    def test_subspace(self):
        V = gen_subspace(5, 3)
        assert expectation_Z(V) == 8
        assert expectation_Y2(V) == 64
        assert pr_Z_positive(V).Pr_Z_pos == 1

    def test_tri_frozen(self, tri):
        # hand computation: q(a) = 7/9 for each a, so E[Z] = 3 * 49/81
        assert expectation_Z(tri) == Fraction(49, 27)
        assert expectation_Z(tri) >= Fraction(27, 256)
        assert expectation_Y2(tri) == Fraction(11, 3)
        assert expectation_Y2(tri, "brute") == Fraction(11, 3)
        rep = pr_Z_positive(tri)
        assert rep.Pr_Z_pos == 1 and rep.ok
        assert rep.paley_zygmund_lower == Fraction(49, 27) ** 2 / Fraction(11, 3)

    @settings(max_examples=40, deadline=None)
    @given(f2sets(max_dim=5, max_size=10))
    def test_against_definition(self, A):
        ez, ey2, pos = brute_quadruples(A)
        bm = brute_moments(A)
        assert expectation_Z(A) == ez == bm["E_Z"]
        assert expectation_Y2(A) == ey2 == bm["E_Y2"]
        assert bm["Pr_Z_pos"] == pos
        rep = pr_Z_positive(A)
        assert rep.Pr_Z_pos == pos and rep.E_Y2 == ey2 and rep.E_Z2 == bm["E_Z2"]
        assert rep.ok

    @pytest.mark.parametrize("seed", range(50))
    def test_pair_count_path_equals_brute(self, seed):
        n = 2 + seed % 4
        A = gen_random(n, 1 + seed % min(24, 1 << n), seed)
        assert expectation_Y2(A, "lemma4") == expectation_Y2(A, "brute")

    def test_brute_cap(self):
        with pytest.raises(CapExceeded):
            brute_moments(gen_subspace(5, 5))

    @given(f2sets(max_dim=7))
    def test_ez_lower_bound(self, A):
        assert lemma6_check(A).passed

    def test_ey2_bound_not_asserted_without_hypothesis(self):
        A = gen_weight_one_prefix(5, 5)
        res = lemma7_check(A, 1)
        assert res.status == NOT_ASSERTED
        assert "hypothesis not satisfied" in res.detail

    def test_ey2_bound_on_dense_sample(self):
        A = gen_dense_subspace_sample(8, 6, Fraction(3, 4), 4)
        res = lemma7_check(A, 2)
        assert res.passed


class TestBijection:
    def test_example(self, tri):
        res = lemma4_bijection_check(tri, 0, 1)
        assert res.passed
        assert res.values["first_size"] == res.values["second_size"] == 5

    def test_diagonal(self, tri):
        p = symmetry_profile(tri)
        for a in tri.bits:
            res = lemma4_bijection_check(tri, a, a)
            assert res.passed
            assert res.values["first_size"] == sum(p.fiber(a ^ c) for c in tri.bits)

    def test_requires_members(self, tri):
        with pytest.raises(ValueError):
            lemma4_bijection_check(tri, 0, 3)

    @pytest.mark.parametrize("seed", range(100))
    def test_random_triples(self, seed):
        n = 2 + seed % 5
        A = gen_random(n, 1 + (seed * 7) % min(20, 1 << n), seed)
        i, j = seed % len(A), (seed * 3) % len(A)
        assert lemma4_bijection_check(A, A.bits[i], A.bits[j]).passed


class TestFreimanRuzsa:
    def test_subspace(self):
        res = freiman_ruzsa_check(gen_subspace(6, 4))
        assert res.passed and res.values["span"] == 16

    def test_prefix_t4(self):
        res = freiman_ruzsa_check(gen_weight_one_prefix(4, 4))
        assert res.passed
        assert res.values["span"] == 16 and res.values["ceil_bound"] == 2 ** 4 * 4

    @given(f2sets(max_dim=8))
    def test_always_holds(self, A):
        assert freiman_ruzsa_check(A).passed


@pytest.mark.parametrize("seed", range(12))
def test_y2_fiber_pairs_matches_pair_count_path(seed):
    n = 4 + seed % 6
    A = gen_random(n, min(5 + 9 * seed, 1 << n), seed)
    assert expectation_Y2(A, "fiber_pairs") == expectation_Y2(A, "lemma4") == expectation_Y2(A, "auto")
