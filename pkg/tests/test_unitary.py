import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperunitary import catalog
from hyperunitary.unitary import (
    IDENTITIES, Transvection, UnitaryError, UnitarySpace, identity_check, identity_sides, index_at,
    omega, pos, r1_partner,
    quadratic_compatibility, random_transvections, relation_sides, steinberg_check,
    steinberg_exhaustive,
)

CATALOG_RINGS = ["sympl-z4", "orth-z4", "gauss-z3", "sympl-z2"]


def basis(sp, i):
    v = np.zeros(sp.N, dtype=np.int64)
    v[sp.pos(i)] = sp.ring.one
    return v


def modmul(a, b, m):
    """Plain integer matrix product modulo m (oracle for Z/m)."""
    n = len(a)
    return [[sum(int(a[r][k]) * int(b[k][c]) for k in range(n)) % m for c in range(n)] for r in range(n)]


def modinv_unipotent(a, m):
    # (e + x)^-1 for a unipotent transvection with x^2 = 0
    n = len(a)
    return [[(2 * (r == c) - int(a[r][c])) % m for c in range(n)] for r in range(n)]


# index set ------------------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_position_map_is_bijection(n):
    ps = [pos(i, n) for i in omega(n)]
    assert sorted(ps) == list(range(2 * n))
    assert all(index_at(pos(i, n), n) == i for i in omega(n))
    assert pos(-1, n) == 2 * n - 1 and pos(-n, n) == n


def test_position_outside_omega():
    with pytest.raises(UnitaryError):
        pos(4, 3)
    with pytest.raises(UnitaryError):
        pos(0, 3)


# forms -----------------------------------------------------------------------------------


@pytest.mark.parametrize("name", CATALOG_RINGS + ["lin-z4", "prod-z2-z4"])
def test_hermitian_form_on_basis(space, name):
    sp = space(name)
    lam = sp.fr.lam
    assert sp.form_h(basis(sp, 1), basis(sp, -1)) == sp.ring.one
    assert sp.form_h(basis(sp, -1), basis(sp, 1)) == lam
    assert sp.form_h(basis(sp, 1), basis(sp, 2)) == 0
    for i in sp.omega:
        assert sp.form_q(basis(sp, i)) == sp.coset_rep(0)


def test_quadratic_form_value(space):
    sp = space("sympl-z4")
    u = sp.ring.add(basis(sp, 1), basis(sp, -1))
    assert sp.form_f(u, u) == 1
    assert sp.form_q(u) == sp.coset_rep(1)


def test_quadratic_form_orthogonal_coset(space):
    # Lambda = {0} keeps q exact
    sp = space("orth-z4")
    u = basis(sp, 2) * 3 + basis(sp, -2) * 3
    assert sp.form_q(u) == 9 % 4


def test_quadratic_hermitian_compatibility_exhaustive(space):
    count, failures = quadratic_compatibility(space("sympl-z4"))
    assert count == 4 ** 12
    assert failures == []


# membership ------------------------------------------------------------------------------


@pytest.mark.parametrize("name", CATALOG_RINGS + ["lin-z4", "prod-z2-z4"])
def test_identity_is_unitary(space, name):
    sp = space(name)
    assert sp.is_unitary(sp.identity)


@pytest.mark.parametrize("name", CATALOG_RINGS)
def test_every_transvection_is_unitary(space, name):
    sp = space(name)
    for i, j in sp.short_roots():
        mats = sp.transvection_batch(i, j, sp.ring.carrier)
        assert np.all(sp.is_unitary_fast(mats))
    for i, _ in sp.long_roots():
        mats = sp.transvection_batch(i, -i, sp.long_params(i))
        assert np.all(sp.is_unitary_fast(mats))
    # exhaustive scan on a handful as a cross-check of the basis-level test
    g = sp.T(1, 2, sp.ring.carrier[-1])
    assert sp.is_unitary(g, exhaustive=True)


def test_uncompensated_elementary_matrix_is_not_unitary(space):
    sp = space("sympl-z4")
    g = sp.identity.copy()
    g[sp.pos(1), sp.pos(2)] = 1
    assert not sp.is_unitary(g)
    # the failing pair named in the example
    assert sp.form_h(g @ basis(sp, 2) % 4, g @ basis(sp, -1) % 4) != sp.form_h(basis(sp, 2), basis(sp, -1))


def test_wrong_shape_is_not_unitary(space):
    sp = space("sympl-z4")
    assert not sp.is_unitary(np.eye(4, dtype=np.int64))


def test_fast_and_exhaustive_membership_agree(space, rng):
    sp = space("sympl-z4")
    mats = rng.integers(0, 4, size=(200, 6, 6))
    ts = random_transvections(sp, rng, 12)
    mats[:12] = [sp.T(t.i, t.j, t.param) for t in ts]
    fast = sp.is_unitary_fast(mats)
    slow = np.array([sp.is_unitary(m, exhaustive=True) for m in mats[:40]])
    assert np.array_equal(fast[:40], slow)
    assert fast[:12].all()


# transvections ---------------------------------------------------------------------------


def test_short_transvection_shape(space):
    sp = space("sympl-z4")
    g = sp.T(1, 2, 3)
    expect = np.eye(6, dtype=np.int64)
    expect[0, 1] = 3
    expect[sp.pos(-2), sp.pos(-1)] = (-3) % 4  # conj trivial, lambda^0
    assert np.array_equal(g, expect)


def test_short_transvection_mixed_signs(space):
    # sign exponent (eps(-2) - eps(1)) / 2 = -1; lambda^-1 = lambda = 3 over Z/4
    sp = space("sympl-z4")
    g = sp.T(1, -2, 1)
    expect = np.eye(6, dtype=np.int64)
    expect[sp.pos(1), sp.pos(-2)] = 1
    expect[sp.pos(2), sp.pos(-1)] = (-3 * 1) % 4
    assert np.array_equal(g, expect)
    assert sp.is_unitary(g)


def test_short_transvection_gaussian_conjugates(space):
    sp = space("gauss-z3")
    r = sp.ring
    xi = r.element("1+2i")
    g = sp.T(1, -2, xi)
    # lambda = 1, so the compensating entry is -conj(xi) = -(1-2i) = 2+2i mod 3
    assert g[sp.pos(2), sp.pos(-1)] == r.element("2+2i")
    assert sp.is_unitary(g)


def test_long_transvection_position(space):
    sp = space("sympl-z4")
    g = sp.T(1, -1, 2)
    assert g[0, 5] == 2
    assert np.count_nonzero(g - np.eye(6, dtype=np.int64)) == 1


def test_long_transvection_admissibility(space):
    sp = space("orth-z4")
    with pytest.raises(UnitaryError):
        sp.T(1, -1, 1)
    assert sp.is_identity(sp.T(1, -1, 0))


@pytest.mark.parametrize("name", CATALOG_RINGS)
def test_transvection_inverse(space, name, rng):
    sp = space(name)
    for t in random_transvections(sp, rng, 30):
        inv = sp.T(t.i, t.j, sp.ring.neg(t.param))
        assert sp.is_identity(sp.matmul(sp.T(t.i, t.j, t.param), inv))


def test_transvection_rejects_bad_indices():
    with pytest.raises(UnitaryError):
        Transvection(2, 2, 1)


def test_matmul_matches_integer_oracle(space, rng):
    sp = space("sympl-z4")
    a = rng.integers(0, 4, size=(6, 6))
    b = rng.integers(0, 4, size=(6, 6))
    assert sp.matmul(a, b).tolist() == modmul(a.tolist(), b.tolist(), 4)


def test_inverse_of_random_word(space, rng):
    sp = space("gauss-z3")
    ts = random_transvections(sp, rng, 15)
    g = sp.word_matrix([(t, 1) for t in ts])
    assert sp.is_identity(sp.matmul(g, sp.inverse(g)))
    assert sp.is_unitary(g)


def test_serialize_roundtrip(space, rng):
    sp = space("sympl-z4")
    g = sp.word_matrix([(t, 1) for t in random_transvections(sp, rng, 5)])
    assert np.array_equal(sp.deserialize(sp.serialize(g)), g)


# Steinberg relations ---------------------------------------------------------------------


def test_r2_example(space):
    sp = space("sympl-z4")
    assert steinberg_check(sp, "R2", (1, 3), 1, 2)
    assert np.array_equal(sp.matmul(sp.T(1, 3, 1), sp.T(1, 3, 2)), sp.T(1, 3, 3))


def test_r4_example_against_integer_oracle(space):
    sp = space("sympl-z4")
    x, y = sp.T(1, 2, 2).tolist(), sp.T(2, 3, 3).tolist()
    com = modmul(modmul(modmul(x, y, 4), modinv_unipotent(x, 4), 4), modinv_unipotent(y, 4), 4)
    assert com == sp.T(1, 3, 2).tolist()
    assert steinberg_check(sp, "R4", (1, 2, 3), 2, 3)


def test_r3_disjoint_commutes(space):
    sp = space("sympl-z4")
    assert steinberg_check(sp, "R3", (1, 2, 1, 3), 1, 3)
    assert sp.is_identity(sp.commutator(sp.T(1, 2, 1), sp.T(1, 3, 3)))


def test_r5_example(space):
    sp = space("sympl-z4")
    lhs, rhs = relation_sides(sp, "R5", (1, 2), 1, 1)
    assert np.array_equal(lhs, sp.commutator(sp.T(1, 2, 1), sp.T(2, -1, 1)))
    assert np.array_equal(lhs, rhs)
    # rhs is T_{1,-1}(xi zeta - lambda^-1 conj(zeta) conj(xi)) = T_{1,-1}(1 + 1) over lambda = -1
    assert np.array_equal(rhs, sp.T(1, -1, 2))


def test_side_conditions_enforced(space):
    sp = space("sympl-z4")
    with pytest.raises(UnitaryError):
        steinberg_check(sp, "R4", (1, 2, -1), 1, 1)
    with pytest.raises(UnitaryError):
        # Lambda = {0} admits no nonzero long parameter
        steinberg_check(space("orth-z4"), "R2", (1, -1), 1, 1)


@pytest.mark.parametrize("name", CATALOG_RINGS)
@pytest.mark.parametrize("relation", ["R1", "R2", "R3", "R4", "R5", "R6"])
def test_steinberg_exhaustive(space, name, relation):
    count, failures = steinberg_exhaustive(space(name), relation)
    assert count > 0
    assert failures == []


def test_printed_r1_reading_fails_over_gaussian(space):
    # the literal sign/twist of the printed symmetry relation does not hold once the involution is nontrivial
    count, failures = steinberg_exhaustive(space("gauss-z3"), "R1-printed")
    assert failures


def test_printed_r6_reading_fails(space):
    fails = [steinberg_exhaustive(space(n), "R6-printed")[1] for n in ["sympl-z4", "gauss-z3"]]
    assert any(fails)


# commutator identities -------------------------------------------------------------------


def test_trivial_commutators(space, rng):
    sp = space("sympl-z4")
    x = sp.word_matrix([(t, 1) for t in random_transvections(sp, rng, 4)])
    assert sp.is_identity(sp.commutator(x, sp.identity))
    assert np.array_equal(sp.conj(sp.identity, x), x)
    assert sp.is_unitary(sp.conj(x, sp.T(1, 2, 1)))


@pytest.mark.parametrize("name", CATALOG_RINGS)
@pytest.mark.parametrize("which", IDENTITIES)
def test_identities_random_triples(space, name, which, rng):
    sp = space(name)
    k = 300
    ts = random_transvections(sp, rng, 3 * k)
    mats = np.array([sp.T(t.i, t.j, t.param) for t in ts]).reshape(3, k, sp.N, sp.N)
    # products of two letters so that the triples are not all transvections
    x = sp.matmul(mats[0], mats[1][::-1])
    lhs, rhs = identity_sides(sp, which, x, mats[1], mats[2])
    assert np.all(lhs == rhs)


def test_identity_c1_with_identity_argument(space, rng):
    sp = space("sympl-z4")
    x, y = (sp.T(t.i, t.j, t.param) for t in random_transvections(sp, rng, 2))
    assert identity_check(sp, "C1", x, y, sp.identity)
    assert identity_check(sp, "C4", x, x, y)


# defects and congruence ------------------------------------------------------------------


def test_q_defect(space):
    sp = space("sympl-z4")
    for j in sp.omega:
        assert sp.q_defect(sp.identity, j) == 0
    assert sp.q_defect(sp.T(1, -1, 2), -1) == 2
    assert sp.q_defect(sp.T(1, 2, 1), 3) == 0


def test_congruence_membership_examples(space):
    sp = space("sympl-z4")
    g = sp.T(1, -1, 2)
    full = catalog.form_ideal("sympl-z4", "2A")
    small = catalog.form_ideal("sympl-z4", "2A-min")
    assert sorted(full.Gamma.elements.tolist()) == [0, 2]
    assert small.Gamma.elements.tolist() == [0]
    assert sp.congruence_membership(g, full)
    assert not sp.congruence_membership(g, small)
    assert sp.congruence_membership(sp.identity, small)
    assert not sp.congruence_membership(sp.T(1, 2, 1), full)
    assert sp.congruence_fast(g, full) and not sp.congruence_fast(g, small)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.sampled_from([(1, 2), (1, -2), (-1, 2), (2, -3), (-3, -1)]))
def test_r1_symmetry_as_matrix_equality(a, b, root):
    s = UnitarySpace(catalog.form_ring("sympl-z4"), 3)
    i, j = root
    assert np.array_equal(s.T(i, j, a), s.T(-j, -i, r1_partner(s, i, j, a)))
    # R2 along the same root
    assert np.array_equal(s.matmul(s.T(i, j, a), s.T(i, j, b)), s.T(i, j, (a + b) % 4))
