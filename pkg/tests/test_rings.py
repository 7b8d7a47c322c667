import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperunitary import catalog
from hyperunitary.rings import (RingError, additive_closure, ideal_closure, ideal_product, make_ring, zero_ideal)


def test_zmod4_trivial_involution():
    r = make_ring("zmod:4")
    assert r.order == 4
    assert list(r.conj(r.carrier)) == [0, 1, 2, 3]


def test_gaussian_mod3_conjugation():
    r = make_ring("gaussian:3")
    assert r.order == 9
    assert r.label(r.conj(r.element("i"))) == "2i"
    assert r.check_involution() is None


def test_product_is_componentwise():
    r = make_ring("product:zmod:2,zmod:4")
    assert r.order == 8
    a, b = r.element("(1,3)"), r.element("(1,2)")
    assert r.label(r.add(a, b)) == "(0,1)"
    assert r.label(r.mul(a, b)) == "(1,2)"


def test_opposite_pair_swaps_and_reverses():
    r = make_ring("opposite:zmod:4")
    assert r.label(r.conj(r.element("(1,3)"))) == "(3,1)"
    assert r.check_involution() is None


@pytest.mark.parametrize("desc", ["zmod:1", "cyclic:3", "product:zmod:2"])
def test_bad_descriptors(desc):
    with pytest.raises(RingError):
        make_ring(desc)


def test_trivial_involution_rejected_on_noncommutative():
    with pytest.raises(RingError):
        make_ring("opposite:zmod:3", involution="trivial")


@pytest.mark.parametrize("name", list(catalog.FINITE))
def test_catalog_involutions_and_axioms(name):
    r = catalog.form_ring(name).ring
    assert r.check_involution() is None
    assert r.check_axioms() is None


def test_additive_closure_examples():
    z4 = make_ring("zmod:4")
    assert list(additive_closure(z4, []).elements) == [0]
    assert list(additive_closure(z4, [2]).elements) == [0, 2]
    g = make_ring("gaussian:3")
    assert sorted(additive_closure(g, [g.element("1+i")]).labels()) == ["0", "1+i", "2+2i"]


def test_ideal_closure_examples():
    z4 = make_ring("zmod:4")
    assert list(ideal_closure(z4, [2]).elements) == [0, 2]
    p = make_ring("product:zmod:2,zmod:4")
    assert ideal_closure(p, [p.element("(0,2)")]).labels() == ["(0,0)", "(0,2)"]
    g = make_ring("gaussian:3")
    assert ideal_closure(g, [g.element("1+i")]).size == 9


def test_ideal_product_is_zero_for_square_zero():
    z4 = make_ring("zmod:4")
    I = ideal_closure(z4, [2])
    assert ideal_product(I, I) == zero_ideal(z4)


@pytest.mark.parametrize("name", ["sympl-z4", "gauss-z3", "lin-z4", "prod-z2-z4"])
def test_ideal_absorbs_multiplication(name):
    r = catalog.form_ring(name).ring
    for g in r.carrier:
        I = ideal_closure(r, [g], involution_invariant=True)
        x, a = np.meshgrid(I.elements, r.carrier, indexing="ij")
        assert I.mask[r.mul(x, a)].all() and I.mask[r.mul(a, x)].all()
        assert I.mask[r.conj(I.elements)].all()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 8), max_size=4), st.lists(st.integers(0, 8), max_size=4))
def test_closure_monotone_idempotent(a, b):
    g = make_ring("gaussian:3")
    A = additive_closure(g, a)
    assert set(a) <= set(A.elements.tolist())
    assert additive_closure(g, A.elements) == A
    assert A <= additive_closure(g, a + b)
