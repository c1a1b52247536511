"""Exact set algebra over F_2^n.

Vectors are bit patterns with an explicit dimension. Coordinate 1 is the most
significant bit, so the binary string of a vector reads coordinates 1..n left
to right and ascending integer order equals lexicographic string order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Union

import numpy as np

MAX_DIM = 64
DENSE_DIM = 20
TABLE_DIM = 24

# pairwise XOR blocks are processed this many rows at a time
_PAIR_BLOCK = 1 << 22


class DimensionError(ValueError):
    """Operands live in different ambient spaces."""


class EmptySetError(ValueError):
    """An operation that needs a nonempty set got an empty one."""


def _check_dim(dim: int) -> None:
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {dim}")


@dataclass(frozen=True, order=True)
class F2Vector:
    bits: int
    dim: int

    def __post_init__(self) -> None:
        _check_dim(self.dim)
        if self.bits < 0 or self.bits >> self.dim:
            raise ValueError(f"bits {self.bits:#x} do not fit in dimension {self.dim}")

    @classmethod
    def from_str(cls, text: str) -> "F2Vector":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a binary string: {text!r}")
        return cls(int(text, 2), len(text))

    @classmethod
    def zero(cls, dim: int) -> "F2Vector":
        return cls(0, dim)

    @classmethod
    def unit(cls, dim: int, coord: int) -> "F2Vector":
        """The unit vector e_coord, coordinates numbered 1..dim."""
        if not 1 <= coord <= dim:
            raise ValueError(f"coordinate {coord} out of range for dimension {dim}")
        return cls(1 << (dim - coord), dim)

    def __add__(self, other: "F2Vector") -> "F2Vector":
        if not isinstance(other, F2Vector):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return F2Vector(self.bits ^ other.bits, self.dim)

    __sub__ = __add__

    def weight(self) -> int:
        return self.bits.bit_count()

    def __str__(self) -> str:
        return format(self.bits, f"0{self.dim}b")


Element = Union[int, F2Vector]


def _as_bits(x: Element, dim: int) -> int:
    if isinstance(x, F2Vector):
        if x.dim != dim:
            raise DimensionError(f"dimension mismatch: set has {dim}, vector has {x.dim}")
        return x.bits
    x = int(x)
    if x < 0 or x >> dim:
        raise ValueError(f"element {x:#x} does not fit in dimension {dim}")
    return x


class F2Set:
    """An immutable finite subset of F_2^n.

    Elements are stored as a sorted tuple of ints; iteration yields
    :class:`F2Vector` in ascending order. ``bits`` and ``array`` expose the raw
    patterns for vectorized work.
    """

    __slots__ = ("dim", "bits", "_members", "_array", "_indicator")

    def __init__(self, dim: int, elements: Iterable[Element] = ()):
        _check_dim(dim)
        self.dim = dim
        members = frozenset(_as_bits(x, dim) for x in elements)
        self._members = members
        self.bits: tuple[int, ...] = tuple(sorted(members))
        self._array: np.ndarray | None = None
        self._indicator: np.ndarray | None = None

    @classmethod
    def _from_sorted_array(cls, dim: int, arr: np.ndarray) -> "F2Set":
        out = cls.__new__(cls)
        out.dim = dim
        out.bits = tuple(int(x) for x in arr)
        out._members = frozenset(out.bits)
        out._array = np.ascontiguousarray(arr, dtype=np.uint64)
        out._indicator = None
        return out

    @classmethod
    def from_strings(cls, strings: Iterable[str], dim: int | None = None) -> "F2Set":
        vecs = [F2Vector.from_str(s) for s in strings]
        if dim is None:
            if not vecs:
                raise ValueError("cannot infer dimension of an empty set")
            dim = vecs[0].dim
        return cls(dim, vecs)

    # --- container protocol -------------------------------------------------

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[F2Vector]:
        return (F2Vector(b, self.dim) for b in self.bits)

    def __contains__(self, x: object) -> bool:
        if isinstance(x, F2Vector):
            return x.dim == self.dim and x.bits in self._members
        if isinstance(x, (int, np.integer)):
            return int(x) in self._members
        return False

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, F2Set):
            return NotImplemented
        return self.dim == other.dim and self.bits == other.bits

    def __hash__(self) -> int:
        return hash((self.dim, self.bits))

    def __le__(self, other: "F2Set") -> bool:
        _same_dim(self, other)
        return self._members <= other._members

    def __repr__(self) -> str:
        if len(self) <= 8:
            body = ", ".join(str(v) for v in self)
        else:
            body = ", ".join(str(v) for v in list(self)[:4]) + f", ... ({len(self)} elements)"
        return f"F2Set(n={self.dim}, {{{body}}})"

    # --- vectorized views ---------------------------------------------------

    @property
    def array(self) -> np.ndarray:
        """Sorted uint64 array of the elements."""
        if self._array is None:
            self._array = np.array(self.bits, dtype=np.uint64)
        return self._array

    @property
    def is_dense(self) -> bool:
        return self.dim <= DENSE_DIM

    def indicator(self) -> np.ndarray:
        """Dense 0/1 table over all 2^n vectors (n <= 24)."""
        if self.dim > TABLE_DIM:
            raise ValueError(f"dense table needs n <= {TABLE_DIM}, got {self.dim}")
        if self._indicator is None:
            table = np.zeros(1 << self.dim, dtype=np.int64)
            table[self.array.astype(np.int64)] = 1
            self._indicator = table
        return self._indicator

    def contains_many(self, values: np.ndarray) -> np.ndarray:
        """Boolean membership mask for an array of bit patterns."""
        values = np.asarray(values, dtype=np.uint64)
        if self.is_dense:
            return self.indicator()[values.astype(np.int64)].astype(bool)
        arr = self.array
        if arr.size == 0:
            return np.zeros(values.shape, dtype=bool)
        pos = np.searchsorted(arr, values)
        pos = np.minimum(pos, arr.size - 1)
        return arr[pos] == values

    def index_of(self, values: np.ndarray) -> np.ndarray:
        """Positions of ``values`` in canonical order; values must be members."""
        return np.searchsorted(self.array, np.asarray(values, dtype=np.uint64))

    def min(self) -> F2Vector:
        _nonempty(self)
        return F2Vector(self.bits[0], self.dim)


def _same_dim(a: F2Set, b: F2Set) -> None:
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def _nonempty(a: F2Set) -> None:
    if len(a) == 0:
        raise EmptySetError("set is empty")


def pair_xor_blocks(left: np.ndarray, right: np.ndarray) -> Iterator[np.ndarray]:
    """Yield row blocks of the XOR table ``left[i] ^ right[j]``."""
    step = max(1, _PAIR_BLOCK // max(1, right.size))
    for start in range(0, left.size, step):
        yield np.bitwise_xor.outer(left[start:start + step], right)


def sumset(A: F2Set, B: F2Set) -> F2Set:
    """{a + b : a in A, b in B}."""
    _same_dim(A, B)
    _nonempty(A)
    _nonempty(B)
    if A.dim <= TABLE_DIM:
        seen = np.zeros(1 << A.dim, dtype=bool)
        for block in pair_xor_blocks(A.array, B.array):
            seen[block.ravel().astype(np.int64)] = True
        return F2Set._from_sorted_array(A.dim, np.flatnonzero(seen).astype(np.uint64))
    parts = [np.unique(block) for block in pair_xor_blocks(A.array, B.array)]
    return F2Set._from_sorted_array(A.dim, np.unique(np.concatenate(parts)))


def translate(A: F2Set, x: Element) -> F2Set:
    """The coset x + A."""
    xb = _as_bits(x, A.dim)
    return F2Set._from_sorted_array(A.dim, np.sort(A.array ^ np.uint64(xb)))


def symmetry_set(A: F2Set, s: Element) -> F2Set:
    """A(s) = A ∩ (s + A): the a in A with a + s also in A."""
    sb = _as_bits(s, A.dim)
    arr = A.array
    return F2Set._from_sorted_array(A.dim, arr[A.contains_many(arr ^ np.uint64(sb))])


def doubling(A: F2Set) -> Fraction:
    """K = |2A| / |A|."""
    _nonempty(A)
    return Fraction(len(sumset(A, A)), len(A))


def union(A: F2Set, B: F2Set) -> F2Set:
    _same_dim(A, B)
    return F2Set(A.dim, A._members | B._members)


class SpanBasis:
    """Echelon basis of the F_2-linear span of a set of vectors.

    Rows have strictly decreasing leading bits and are fully reduced, so each
    pivot bit appears in exactly one row.
    """

    def __init__(self, dim: int, rows: Iterable[int] = ()):
        _check_dim(dim)
        self.dim = dim
        self._pivots: dict[int, int] = {}
        for r in rows:
            self.add(r)

    def add(self, x: Element) -> bool:
        """Insert a vector; returns True if it increased the rank."""
        v = self.reduce(x)
        if v == 0:
            return False
        lead = v.bit_length() - 1
        for p, row in self._pivots.items():
            if (row >> lead) & 1:
                self._pivots[p] = row ^ v
        self._pivots[lead] = v
        return True

    def reduce(self, x: Element) -> int:
        v = _as_bits(x, self.dim)
        for p in sorted(self._pivots, reverse=True):
            if (v >> p) & 1:
                v ^= self._pivots[p]
        return v

    def contains(self, x: Element) -> bool:
        return self.reduce(x) == 0

    def reduce_many(self, values: np.ndarray) -> np.ndarray:
        v = np.array(values, dtype=np.uint64, copy=True)
        one = np.uint64(1)
        for p in sorted(self._pivots, reverse=True):
            hit = ((v >> np.uint64(p)) & one).astype(bool)
            v[hit] ^= np.uint64(self._pivots[p])
        return v

    @property
    def rows(self) -> list[F2Vector]:
        return [F2Vector(self._pivots[p], self.dim) for p in sorted(self._pivots, reverse=True)]

    @property
    def rank(self) -> int:
        return len(self._pivots)

    @property
    def size(self) -> int:
        return 1 << self.rank

    def __repr__(self) -> str:
        return f"SpanBasis(n={self.dim}, rank={self.rank})"


def span_basis(A: F2Set) -> SpanBasis:
    _nonempty(A)
    return SpanBasis(A.dim, A.bits)


def span_size(A: F2Set) -> int:
    return span_basis(A).size


def sumset_span_basis(A: F2Set) -> SpanBasis:
    """Basis of span(2A) without materializing 2A.

    a1 + a2 = (a1 + a0) + (a2 + a0) for a fixed a0 in A, so span(2A) is
    spanned by a0 + A.
    """
    _nonempty(A)
    a0 = A.bits[0]
    return SpanBasis(A.dim, (a ^ a0 for a in A.bits))
