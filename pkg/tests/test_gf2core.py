from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import S, brute_fibers, brute_span_size, f2sets
from f2pfr.gf2core import (
    DimensionError,
    EmptySetError,
    F2Set,
    F2Vector,
    SpanBasis,
    doubling,
    span_basis,
    sumset,
    sumset_span_basis,
    symmetry_set,
    translate,
)
from f2pfr.generators import gen_subspace, gen_weight_one_prefix


class TestVector:
    def test_string_roundtrip(self):
        v = F2Vector.from_str("0110")
        assert v.bits == 0b0110 and v.dim == 4
        assert str(v) == "0110"

    def test_unit_vector_coordinate_one_is_msb(self):
        assert str(F2Vector.unit(4, 1)) == "1000"
        assert str(F2Vector.unit(4, 4)) == "0001"

    def test_addition_is_xor_and_self_inverse(self):
        v = F2Vector.from_str("1011")
        w = F2Vector.from_str("0110")
        assert str(v + w) == "1101"
        assert (v + v).bits == 0

    def test_high_bits_rejected(self):
        with pytest.raises(ValueError):
            F2Vector(0b100, 2)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            F2Vector(1, 2) + F2Vector(1, 3)

    @pytest.mark.parametrize("bad", ["", "012", "ab"])
    def test_bad_strings(self, bad):
        with pytest.raises(ValueError):
            F2Vector.from_str(bad)


class TestSet:
    def test_dedup_and_canonical_order(self):
        A = F2Set(3, [5, 1, 5, 3])
        assert A.bits == (1, 3, 5)
        assert [str(v) for v in A] == ["001", "011", "101"]

    def test_membership_accepts_vectors_and_ints(self):
        A = S("01", "10")
        assert F2Vector.from_str("01") in A
        assert 2 in A
        assert F2Vector.from_str("001") not in A

    def test_dense_and_sparse_membership_agree(self):
        vals = [0, 7, 1 << 21, (1 << 22) + 5]
        probe = np.array(vals + [3, 1 << 20], dtype=np.uint64)
        sparse = F2Set(23, vals)
        dense = F2Set(20, [0, 7, 1 << 19])
        assert not sparse.is_dense and dense.is_dense
        assert sparse.contains_many(probe).tolist() == [True] * 4 + [False, False]
        assert dense.contains_many(np.array([0, 7, 1 << 19, 3], dtype=np.uint64)).tolist() == [
            True, True, True, False]

    def test_element_out_of_range(self):
        with pytest.raises(ValueError):
            F2Set(2, [4])


class TestSumset:
    def test_zero_is_identity(self):
        B = S("0110", "1111", "0001")
        assert sumset(S("0000"), B) == B

    def test_all_four_xors(self):
        assert sumset(S("00", "01"), S("00", "10")) == S("00", "01", "10", "11")

    def test_unit_vectors_n4(self):
        A = gen_weight_one_prefix(4, 4)
        expected = {a ^ b for a in A.bits for b in A.bits}
        assert len(expected) == 7
        assert set(sumset(A, A).bits) == expected

    def test_errors(self):
        with pytest.raises(DimensionError):
            sumset(S("01"), S("001"))
        with pytest.raises(EmptySetError):
            sumset(F2Set(2), S("01"))

    def test_large_dim_path(self):
        A = F2Set(40, [0, 1 << 39, 12345, (1 << 30) + 7])
        assert set(sumset(A, A).bits) == {a ^ b for a in A.bits for b in A.bits}

    @given(f2sets(), st.data())
    def test_commutative_and_monotone(self, A, data):
        B = F2Set(A.dim, data.draw(st.sets(st.integers(0, (1 << A.dim) - 1), min_size=1)))
        assert sumset(A, B) == sumset(B, A)
        sub = F2Set(A.dim, A.bits[: max(1, len(A) // 2)])
        assert set(sumset(sub, B).bits) <= set(sumset(A, B).bits)


class TestSymmetrySet:
    def test_zero_gives_A(self, tri):
        assert symmetry_set(tri, 0) == tri

    def test_examples(self, tri):
        assert symmetry_set(tri, F2Vector.from_str("11")) == S("01", "10")
        assert symmetry_set(tri, F2Vector.from_str("01")) == S("00", "01")

    def test_dimension_mismatch(self, tri):
        with pytest.raises(DimensionError):
            symmetry_set(tri, F2Vector.from_str("011"))

    @given(f2sets(), st.data())
    def test_size_counts_representations(self, A, data):
        s = data.draw(st.integers(0, (1 << A.dim) - 1))
        fib = brute_fibers(A)
        assert len(symmetry_set(A, s)) == fib.get(s, 0)

    @given(f2sets())
    def test_parity_and_support(self, A):
        fib = brute_fibers(A)
        for s in range(1 << A.dim):
            size = len(symmetry_set(A, s))
            assert (size >= 1) == (s in fib)
            if s:
                assert size % 2 == 0


class TestDoubling:
    def test_subspace(self):
        assert doubling(gen_subspace(5, 3)) == 1

    def test_examples(self, tri):
        assert doubling(tri) == Fraction(4, 3)
        assert doubling(gen_weight_one_prefix(4, 4)) == Fraction(7, 4)

    def test_empty(self):
        with pytest.raises(EmptySetError):
            doubling(F2Set(3))


class TestSpan:
    def test_two_independent(self):
        b = span_basis(S("110", "011"))
        assert b.rank == 2 and b.size == 4

    def test_zero(self):
        b = span_basis(S("000"))
        assert b.rank == 0 and b.size == 1

    def test_unit_vectors(self):
        A = gen_weight_one_prefix(4, 4)
        assert span_basis(A).size == 16 == 4 * len(A)

    def test_echelon_rows(self):
        b = span_basis(F2Set(6, [0b111000, 0b011100, 0b001110, 0b110110]))
        leads = [r.bits.bit_length() for r in b.rows]
        assert leads == sorted(leads, reverse=True) and len(set(leads)) == len(leads)

    @given(f2sets())
    def test_properties(self, A):
        b = span_basis(A)
        assert b.size == brute_span_size(A.bits)
        assert all(b.contains(a) for a in A.bits)
        again = SpanBasis(A.dim, [r.bits for r in b.rows] + list(A.bits))
        assert again.rank == b.rank
        assert len(sumset(A, A)) <= b.size
        assert all(b.contains(s) for s in sumset(A, A).bits)

    @given(f2sets())
    def test_sumset_span_shortcut(self, A):
        assert sumset_span_basis(A).rank == span_basis(sumset(A, A)).rank

    def test_reduce_many_matches_scalar(self):
        b = span_basis(F2Set(8, [0b10110000, 0b01100001, 0b00011110]))
        vals = np.arange(256, dtype=np.uint64)
        assert b.reduce_many(vals).tolist() == [b.reduce(int(v)) for v in vals]


class TestTranslate:
    def test_zero(self, tri):
        assert translate(tri, 0) == tri

    def test_example(self):
        assert translate(S("00", "01"), F2Vector.from_str("11")) == S("11", "10")

    def test_mismatch(self, tri):
        with pytest.raises(DimensionError):
            translate(tri, F2Vector.from_str("1"))

    @given(f2sets(), st.data())
    def test_size_preserved(self, A, data):
        x = data.draw(st.integers(0, (1 << A.dim) - 1))
        assert len(translate(A, x)) == len(A)
