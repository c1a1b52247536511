from collections import Counter
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import strategies as st

from f2pfr.gf2core import F2Set


def S(*strings):
    return F2Set.from_strings(strings)


def brute_fibers(A):
    """s -> number of ordered pairs (a1, a2) in A^2 with a1 ^ a2 == s."""
    return dict(sorted(Counter(a ^ b for a in A.bits for b in A.bits).items()))


def brute_span_size(bits):
    """Size of the span by closing under XOR, no elimination."""
    span = {0}
    for b in bits:
        span |= {x ^ b for x in span}
    return len(span)


def brute_quadruples(A):
    """E[Z], E[Y^2], Pr[Z > 0] straight from the definitions, one quadruple at a time."""
    members = set(A.bits)
    m = len(A.bits)
    K = Fraction(len({a ^ b for a in A.bits for b in A.bits}), m)
    low = Fraction(m) / (2 * K)
    fib = {}
    for b1, b2 in product(A.bits, repeat=2):
        s = b1 ^ b2
        if s not in fib:
            fib[s] = frozenset(a for a in A.bits if a ^ s in members)
    ez = ey2 = pos = 0
    for b1, b2, b3, b4 in product(A.bits, repeat=4):
        f1, f2 = fib[b1 ^ b2], fib[b3 ^ b4]
        y = len(f1 & f2)
        z = 0 if len(f1) <= low or len(f2) <= low else y
        ez += z
        ey2 += y * y
        pos += z > 0
    q = m ** 4
    return Fraction(ez, q), Fraction(ey2, q), Fraction(pos, q)


@st.composite
def f2sets(draw, max_dim=6, min_size=1, max_size=None):
    n = draw(st.integers(1, max_dim))
    cap = 1 << n if max_size is None else min(1 << n, max_size)
    elems = draw(st.sets(st.integers(0, (1 << n) - 1), min_size=min(min_size, cap), max_size=cap))
    return F2Set(n, elems)


@pytest.fixture
def tri():
    return S("00", "01", "10")
