import itertools

import numpy as np
import pytest

from hyperunitary import catalog
from hyperunitary.form import (FormError, FormIdeal, FormRing, enumerate_form_parameters, form_ideal_sum,
                               gamma_max, gamma_min, is_scaling_stable, lambda_max, lambda_min, symmetrized_product,
                               twisted_parameter, validate_form_ideal)
from hyperunitary.rings import additive_closure, ideal_closure, make_ring, zero_ideal

Z4 = make_ring("zmod:4")
G3 = make_ring("gaussian:3")


def labels(group):
    return sorted(group.labels())


def test_lambda_bounds_zmod4():
    assert labels(lambda_min(Z4, 1)) == ["0"]
    assert labels(lambda_min(Z4, 3)) == ["0", "2"]
    assert labels(lambda_max(Z4, 1)) == ["0", "2"]
    assert labels(lambda_max(Z4, 3)) == ["0", "1", "2", "3"]


def test_lambda_bounds_gaussian():
    assert labels(lambda_min(G3, 1)) == ["0", "2i", "i"]
    assert lambda_min(G3, 1) == lambda_max(G3, 1)


def test_enumerate_parameters():
    found = enumerate_form_parameters(Z4, 3)
    assert [labels(x) for x in found] == [["0", "2"], ["0", "1", "2", "3"]]
    assert [labels(x) for x in enumerate_form_parameters(G3, 1)] == [["0", "2i", "i"]]
    z2 = make_ring("zmod:2")
    assert [labels(x) for x in enumerate_form_parameters(z2, 1)] == [["0"], ["0", "1"]]


def test_enumerate_rejects_large_carrier():
    with pytest.raises(FormError):
        enumerate_form_parameters(make_ring("zmod:128"), 1)


def test_bad_symmetry():
    with pytest.raises(FormError):
        FormRing.build(Z4, 2)


@pytest.mark.parametrize("name", list(catalog.FINITE))
def test_catalog_form_rings_valid(name):
    fr = catalog.form_ring(name)
    assert lambda_min(fr.ring, fr.lam) <= fr.Lambda <= lambda_max(fr.ring, fr.lam)
    assert is_scaling_stable(fr.ring, fr.Lambda) is None


def test_gamma_bounds_sympl_z4():
    fr = catalog.form_ring("sympl-z4")
    I = ideal_closure(Z4 if fr.ring is Z4 else fr.ring, [2], True)
    assert labels(gamma_min(fr, I)) == ["0"]
    assert labels(gamma_max(fr, I)) == ["0", "2"]
    assert gamma_max(fr, fr.unit_ideal()) == fr.Lambda
    zero = zero_ideal(fr.ring)
    assert labels(gamma_min(fr, zero)) == labels(gamma_max(fr, zero)) == ["0"]


def test_validate_form_ideal_examples():
    fr = catalog.form_ring("sympl-z4")
    r = fr.ring
    I = ideal_closure(r, [2], True)
    assert validate_form_ideal(fr, I, additive_closure(r, [2])) is None
    v = validate_form_ideal(fr, I, additive_closure(r, [1]))
    assert v.condition == "Gamma is not contained in I"
    v = validate_form_ideal(fr, fr.unit_ideal(), additive_closure(r, []))
    assert v.condition == "Gamma_min(I) is not contained in Gamma"


def test_sum_examples():
    fr = catalog.form_ring("sympl-z4")
    a = FormIdeal.build(fr, [2], "max")
    z = FormIdeal.build(fr, [0], "max")
    assert form_ideal_sum(a, z) == a
    assert form_ideal_sum(FormIdeal.build(fr, [2], "min"), a) == a
    p = catalog.form_ring("prod-z2-z4")
    I, J = catalog.form_ideal("prod-z2-z4", "I"), catalog.form_ideal("prod-z2-z4", "J")
    s = form_ideal_sum(I, J)
    assert s.I == J.I and s.Gamma == I.Gamma + J.Gamma


def test_twisted_parameter_examples():
    fr = catalog.form_ring("sympl-z4")
    r = fr.ring
    J = ideal_closure(r, [2], True)
    G = additive_closure(r, [2])
    assert labels(twisted_parameter(J, G)) == ["0"]
    assert G <= twisted_parameter(fr.unit_ideal(), G)
    assert labels(twisted_parameter(zero_ideal(r), G)) == ["0"]


def test_symmetrized_product_examples():
    fr = catalog.form_ring("sympl-z4")
    a = FormIdeal.build(fr, [2], "max")
    prod = symmetrized_product(a, a)
    assert prod.is_zero() and labels(prod.Gamma) == ["0"]
    assert symmetrized_product(fr.full(), a).I == a.I
    I, J = catalog.form_ideal("prod-z2-z4", "I"), catalog.form_ideal("prod-z2-z4", "J")
    assert labels(symmetrized_product(I, J).I) == ["(0,0)", "(0,2)"]


def _catalog_ideals():
    for name, e in catalog.FINITE.items():
        for k in e.ideals:
            yield name, k


@pytest.mark.parametrize("name", list(catalog.FINITE))
def test_products_and_sums_are_valid(name):
    ideals = [catalog.form_ideal(name, k) for k in catalog.FINITE[name].ideals]
    fr = catalog.form_ring(name)
    for a, b in itertools.product(ideals, repeat=2):
        for c in (form_ideal_sum(a, b), symmetrized_product(a, b)):
            assert validate_form_ideal(fr, c.I, c.Gamma) is None
        prod = symmetrized_product(a, b)
        assert prod.I <= (a.I & b.I)
    for a in ideals:
        assert gamma_min(fr, a.I) <= gamma_max(fr, a.I)
        assert validate_form_ideal(fr, a.I, gamma_min(fr, a.I)) is None
