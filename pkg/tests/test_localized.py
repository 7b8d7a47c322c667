from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hyperunitary.localized import IntegralLattice, LocalError, LocalizedRing

Z2 = LocalizedRing("Z", 2)
G2 = LocalizedRing("Z[i]", 2)

fracs = st.tuples(st.integers(-10 ** 6, 10 ** 6), st.integers(-8, 8))


def as_fraction(s):
    x, y = s.as_fractions()
    assert y == 0
    return x


@settings(max_examples=200, deadline=None)
@given(fracs, fracs)
def test_dyadic_arithmetic_matches_fractions(a, b):
    x, y = Z2.make(a[0], 0, a[1]), Z2.make(b[0], 0, b[1])
    fa, fb = Fraction(a[0], 2 ** a[1]) if a[1] >= 0 else Fraction(a[0] * 2 ** -a[1]), \
        Fraction(b[0], 2 ** b[1]) if b[1] >= 0 else Fraction(b[0] * 2 ** -b[1])
    assert as_fraction(x + y) == fa + fb
    assert as_fraction(x * y) == fa * fb
    assert as_fraction(x - y) == fa - fb


@settings(max_examples=100, deadline=None)
@given(st.integers(-999, 999), st.integers(-999, 999), st.integers(-999, 999), st.integers(-999, 999),
       st.integers(-5, 5), st.integers(-5, 5))
def test_gaussian_product_and_valuation(a, b, c, d, j, k):
    x, y = G2.make(a, b, j), G2.make(c, d, k)
    p = x * y
    px, py = p.as_fractions()
    xa, xb = x.as_fractions()
    ya, yb = y.as_fractions()
    assert (px, py) == (xa * ya - xb * yb, xa * yb + xb * ya)
    if not x.is_zero() and not y.is_zero():
        assert p.valuation() >= x.valuation() + y.valuation()


def test_reduced_numerator_is_t_free():
    s = Z2.make(12, 0, 1)
    assert (s.x, s.k) == (3, -1)
    assert s.valuation() == 1
    assert Z2.make(0, 0, 5).valuation() is None


def test_valuation_additive_over_z():
    assert (Z2.make(3, 0, 2) * Z2.make(5, 0, -3)).valuation() == 1


def test_imaginary_part_rejected_over_z():
    with pytest.raises(LocalError):
        Z2.make(1, 1)


def test_lattice_membership():
    L = IntegralLattice(G2, [(0, 3)])
    assert L.contains(0, 6)
    assert not L.contains(3, 0)
    assert not L.contains_scalar(G2.make(0, 3, 1))
