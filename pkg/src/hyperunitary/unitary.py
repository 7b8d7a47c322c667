"""Hyperbolic unitary groups over finite form rings.

Basis order is ``e_1, ..., e_n, e_-n, ..., e_-1``; index ``i > 0`` sits at
position ``i - 1`` and ``i < 0`` at position ``2n + i`` (zero based).  Matrices
are numpy arrays of ring handles, optionally with leading batch axes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .form import FormIdeal, FormRing, lambda_power
from .rings import AdditiveSubgroup, all_vectors

EXHAUSTIVE_LIMIT = 2 ** 20


class UnitaryError(ValueError):
    pass


def eps(i: int) -> int:
    return 1 if i > 0 else -1


def omega(n: int) -> list[int]:
    return list(range(1, n + 1)) + list(range(-n, 0))


def pos(i: int, n: int) -> int:
    if not (1 <= abs(i) <= n):
        raise UnitaryError(f"index {i} outside Omega for n = {n}")
    return i - 1 if i > 0 else 2 * n + i


def index_at(p: int, n: int) -> int:
    return p + 1 if p < n else p - 2 * n


@dataclass(frozen=True, order=True)
class Transvection:
    """``T_ij(param)``; ``j == -i`` makes it a long root element."""

    i: int
    j: int
    param: int

    def __post_init__(self):
        if self.i == self.j or self.i == 0 or self.j == 0:
            raise UnitaryError(f"bad transvection indices ({self.i}, {self.j})")

    @property
    def is_long(self) -> bool:
        return self.j == -self.i

    def __str__(self):
        return f"T({self.i},{self.j},{self.param})"


# a word is a tuple of (Transvection, +1 | -1)
GroupWord = tuple


def word_inverse(word: Sequence) -> tuple:
    return tuple((t, -e) for t, e in reversed(word))


class UnitarySpace:
    """The hyperbolic unitary group ``GU(2n, A, Lambda)`` of a finite form ring."""

    def __init__(self, fr: FormRing, n: int):
        if n < 1:
            raise UnitaryError("rank n must be positive")
        self.fr = fr
        self.ring = fr.ring
        self.n = n
        self.N = 2 * n
        self.omega = omega(n)
        ring = self.ring
        self.identity = np.zeros((self.N, self.N), dtype=np.int64)
        np.fill_diagonal(self.identity, ring.one)
        self.identity.setflags(write=False)
        self.plus = np.arange(n)
        self.minus = np.array([pos(-k, n) for k in range(1, n + 1)])
        # h(e_a, e_b) on the basis
        gram = np.zeros((self.N, self.N), dtype=np.int64)
        for k in range(1, n + 1):
            gram[pos(k, n), pos(-k, n)] = ring.one
            gram[pos(-k, n), pos(k, n)] = fr.lam
        self.gram_h = gram
        self.gram_h.setflags(write=False)

    # index helpers ------------------------------------------------------------------

    def pos(self, i: int) -> int:
        return pos(i, self.n)

    def lam_pow(self, e: int) -> int:
        return lambda_power(self.ring, self.fr.lam, e)

    def sign_factor(self, i: int, j: int) -> int:
        """``lambda ** ((eps(j) - eps(i)) / 2)``."""
        return self.lam_pow((eps(j) - eps(i)) // 2)

    def long_twist(self, i: int) -> int:
        """``lambda ** (-(eps(i) + 1) / 2)``: long root parameters at ``i`` form ``long_twist(i) * Lambda``."""
        return self.lam_pow(-(eps(i) + 1) // 2)

    def long_params(self, i: int, gamma: AdditiveSubgroup | None = None) -> np.ndarray:
        gamma = self.fr.Lambda if gamma is None else gamma
        return np.unique(self.ring.mul(self.long_twist(i), gamma.elements))

    def long_param_ok(self, i: int, alpha: int, gamma: AdditiveSubgroup | None = None) -> bool:
        gamma = self.fr.Lambda if gamma is None else gamma
        # alpha in lambda^s Gamma  <=>  lambda^-s alpha in Gamma
        return bool(gamma.mask[int(self.ring.mul(self.lam_pow((eps(i) + 1) // 2), alpha))])

    def short_roots(self):
        return [(i, j) for i in self.omega for j in self.omega if i != j and i != -j]

    def long_roots(self):
        return [(i, -i) for i in self.omega]

    # matrices ---------------------------------------------------------------------------

    def matmul(self, a, b):
        ring = self.ring
        a = np.asarray(a)
        b = np.asarray(b)
        prods = ring.mul(a[..., :, :, None], b[..., None, :, :])
        out = prods[..., 0, :]
        for k in range(1, self.N):
            out = ring.add(out, prods[..., k, :])
        return out

    def product(self, mats: Iterable):
        out = self.identity
        for m in mats:
            out = self.matmul(out, m)
        return out

    def inverse(self, g):
        """Inverse of a unitary matrix, read off from the form: ``(g^-1)_ij = s_i conj(g_-j,-i) r_j``."""
        ring = self.ring
        g = np.asarray(g)
        rev = g[..., ::-1, ::-1]
        t = ring.conj(np.swapaxes(rev, -1, -2))
        lam, lamb = self.fr.lam, int(ring.conj(self.fr.lam))
        s = np.array([lamb] * self.n + [ring.one] * self.n)
        r = np.array([lam] * self.n + [ring.one] * self.n)
        return ring.mul(ring.mul(s[:, None], t), r[None, :])

    def commutator(self, x, y):
        return self.product([x, y, self.inverse(x), self.inverse(y)])

    def conj(self, x, y):
        """``^x y = x y x^-1``."""
        return self.product([x, y, self.inverse(x)])

    def equal(self, a, b) -> bool:
        return bool(np.array_equal(a, b))

    def is_identity(self, g) -> bool:
        return bool(np.array_equal(g, self.identity))

    # transvections ---------------------------------------------------------------------

    def transvection(self, i: int, j: int, param) -> Transvection:
        return Transvection(i, j, self.ring.element(param))

    def check_transvection(self, t: Transvection) -> None:
        self.pos(t.i), self.pos(t.j)
        if t.is_long and not self.long_param_ok(t.i, t.param):
            raise UnitaryError(f"long root parameter {self.ring.label(t.param)} not admissible at index {t.i}")

    def transvection_matrix(self, t: Transvection, check: bool = True):
        if check:
            self.check_transvection(t)
        return self.transvection_batch(t.i, t.j, np.array([t.param]))[0]

    def T(self, i: int, j: int, param):
        return self.transvection_matrix(self.transvection(i, j, param))

    def transvection_batch(self, i: int, j: int, params) -> np.ndarray:
        """Matrices ``T_ij(xi)`` for an array of parameters, without admissibility checks."""
        ring = self.ring
        params = np.asarray(params, dtype=np.int64)
        out = np.broadcast_to(self.identity, params.shape + (self.N, self.N)).copy()
        pi, pj = self.pos(i), self.pos(j)
        if j == -i:
            out[..., pi, pj] = params
        else:
            out[..., pi, pj] = params
            c = ring.neg(ring.mul(self.sign_factor(i, j), ring.conj(params)))
            out[..., self.pos(-j), self.pos(-i)] = c
        return out

    def inverse_letter(self, t: Transvection) -> Transvection:
        return Transvection(t.i, t.j, int(self.ring.neg(t.param)))

    def word_matrix(self, word: Sequence):
        mats = []
        for t, e in word:
            mats.append(self.transvection_matrix(t if e > 0 else self.inverse_letter(t), check=False))
        return self.product(mats)

    # forms ---------------------------------------------------------------------------------

    def form_f(self, u, v):
        ring = self.ring
        u, v = np.asarray(u), np.asarray(v)
        terms = ring.mul(ring.conj(u[..., self.plus]), v[..., self.minus])
        return ring.sum(terms, axis=-1)

    def form_h(self, u, v):
        ring = self.ring
        return ring.add(self.form_f(u, v), ring.mul(self.fr.lam, ring.conj(self.form_f(v, u))))

    def coset_rep(self, value, group: AdditiveSubgroup | None = None):
        """Least carrier handle in ``value + group``."""
        group = self.fr.Lambda if group is None else group
        value = np.asarray(value)
        cands = self.ring.add(value[..., None], group.elements)
        return cands.min(axis=-1)

    def form_q(self, u):
        return self.coset_rep(self.form_f(u, u))

    def gram_f(self, g):
        """``F[a, b] = f(g e_a, g e_b)`` for (batched) ``g``."""
        ring = self.ring
        g = np.asarray(g)
        top = ring.conj(g[..., self.plus, :])
        bot = g[..., self.minus, :]
        terms = ring.mul(top[..., :, :, None], bot[..., :, None, :])
        out = terms[..., 0, :, :]
        for k in range(1, self.n):
            out = ring.add(out, terms[..., k, :, :])
        return out

    def q_defect(self, g, j: int):
        """``sum_{i > 0} conj(g_ij) g_-i,j``, that is ``f(g e_j, g e_j)``."""
        g = np.asarray(g)
        col = g[..., :, self.pos(j)]
        return self.form_f(col, col)

    def basis_defects(self, g):
        """``f(g e_j, g e_j)`` for every basis position (batched)."""
        ring = self.ring
        g = np.asarray(g)
        terms = ring.mul(ring.conj(g[..., self.plus, :]), g[..., self.minus, :])
        out = terms[..., 0, :]
        for k in range(1, self.n):
            out = ring.add(out, terms[..., k, :])
        return out

    def preserves_h(self, g):
        """Batched test ``h(g e_a, g e_b) = h(e_a, e_b)`` for all basis pairs."""
        ring = self.ring
        F = self.gram_f(g)
        H = ring.add(F, ring.mul(self.fr.lam, ring.conj(np.swapaxes(F, -1, -2))))
        return np.all(H == self.gram_h, axis=(-1, -2))

    def is_unitary_fast(self, g, gamma: AdditiveSubgroup | None = None):
        """Batched basis-level test: ``h`` preserved on basis pairs and basis defects in ``gamma``.

        ``q(u+v) - q(u) - q(v) = h(u, v)`` modulo ``Lambda`` makes this equivalent to the
        full definition.
        """
        gamma = self.fr.Lambda if gamma is None else gamma
        return self.preserves_h(g) & np.all(gamma.mask[self.basis_defects(g)], axis=-1)

    def test_vectors(self, exhaustive: bool | None = None) -> np.ndarray:
        ring = self.ring
        if exhaustive is None:
            exhaustive = ring.order ** self.N <= EXHAUSTIVE_LIMIT
        if exhaustive:
            if ring.order ** self.N > 4 * EXHAUSTIVE_LIMIT:
                raise UnitaryError("vector space too large for exhaustive scan")
            return all_vectors(ring, self.N)
        vecs = [self.identity[p] for p in range(self.N)]
        for p in range(self.N):
            for q in range(p + 1, self.N):
                for a in ring.carrier:
                    v = np.zeros(self.N, dtype=np.int64)
                    v[p] = ring.one
                    v[q] = a
                    vecs.append(v)
        return np.array(vecs)

    def apply(self, g, vecs):
        """Rows of ``vecs`` mapped by ``g`` (returns rows ``g u``)."""
        ring = self.ring
        prods = ring.mul(np.asarray(g)[None, :, :], np.asarray(vecs)[:, None, :])
        out = prods[..., 0]
        for k in range(1, self.N):
            out = ring.add(out, prods[..., k])
        return out

    def _defects_over(self, g, vecs, gamma):
        ring = self.ring
        gu = self.apply(g, vecs)
        d = ring.sub(self.form_f(gu, gu), self.form_f(vecs, vecs))
        return bool(np.all(gamma.mask[d]))

    def is_unitary(self, g, exhaustive: bool | None = None) -> bool:
        g = np.asarray(g)
        if g.shape != (self.N, self.N):
            return False
        if not bool(self.preserves_h(g)):
            return False
        return self._defects_over(g, self.test_vectors(exhaustive), self.fr.Lambda)

    def congruence_membership(self, g, fi: FormIdeal, exhaustive: bool | None = None) -> bool:
        ring = self.ring
        diff = ring.sub(np.asarray(g), self.identity)
        if not np.all(fi.I.mask[diff]):
            return False
        return self._defects_over(g, self.test_vectors(exhaustive), fi.Gamma)

    def congruence_fast(self, g, fi: FormIdeal):
        """Batched congruence test for matrices already known to be unitary."""
        ring = self.ring
        diff = ring.sub(np.asarray(g), self.identity)
        return np.all(fi.I.mask[diff], axis=(-1, -2)) & np.all(fi.Gamma.mask[self.basis_defects(g)], axis=-1)

    # serialization -------------------------------------------------------------------------

    def serialize(self, g) -> str:
        return "[" + ",".join(str(int(x)) for x in np.asarray(g).ravel()) + "]"

    def deserialize(self, text: str):
        vals = [int(x) for x in text.strip().strip("[]").split(",")]
        return np.array(vals, dtype=np.int64).reshape(self.N, self.N)


# Steinberg relations -------------------------------------------------------------------


RELATIONS = ("R1", "R2", "R3", "R4", "R5", "R6")


def r1_partner(space: UnitarySpace, i: int, j: int, xi):
    """Parameter ``zeta`` with ``T_ij(xi) = T_-j,-i(zeta)``: ``zeta = -lambda^((eps j - eps i)/2) conj(xi)``."""
    ring = space.ring
    return ring.neg(ring.mul(space.sign_factor(i, j), ring.conj(xi)))


def r1_printed_partner(space: UnitarySpace, i: int, j: int, xi):
    """The same reading without the leading minus sign."""
    ring = space.ring
    return ring.mul(space.sign_factor(i, j), ring.conj(xi))


def relation_sides(space: UnitarySpace, relation: str, idx: tuple, xi, zeta=None):
    """Both sides of a Steinberg relation for (batched) parameters; returns ``(lhs, rhs)``."""
    ring = space.ring
    T = space.transvection_batch
    com = space.commutator
    xi = np.asarray(xi)
    if relation == "R1":
        i, j = idx
        return T(i, j, xi), T(-j, -i, r1_partner(space, i, j, xi))
    if relation == "R1-printed":
        i, j = idx
        return T(i, j, xi), T(-j, -i, r1_printed_partner(space, i, j, xi))
    zeta = np.asarray(zeta)
    if relation == "R2":
        i, j = idx
        return space.matmul(T(i, j, xi), T(i, j, zeta)), T(i, j, ring.add(xi, zeta))
    if relation == "R3":
        i, j, h, k = idx
        lhs = com(T(i, j, xi), T(h, k, zeta))
        return lhs, np.broadcast_to(space.identity, lhs.shape)
    if relation == "R4":
        i, j, h = idx
        return com(T(i, j, xi), T(j, h, zeta)), T(i, h, ring.mul(xi, zeta))
    if relation == "R5":
        i, j = idx
        c = ring.mul(ring.mul(space.lam_pow(-eps(i)), ring.conj(zeta)), ring.conj(xi))
        return com(T(i, j, xi), T(j, -i, zeta)), T(i, -i, ring.sub(ring.mul(xi, zeta), c))
    if relation in ("R6", "R6-printed"):
        # the long factor carries lambda^((eps i + eps j)/2); the printed reading has lambda^((eps j - eps i)/2)
        i, j = idx
        lp = space.lam_pow((eps(i) + eps(j)) // 2) if relation == "R6" else space.sign_factor(i, j)
        c = ring.mul(ring.mul(ring.mul(lp, ring.conj(zeta)), xi), zeta)
        rhs = space.matmul(T(i, j, ring.mul(xi, zeta)), T(-j, j, ring.neg(c)))
        return com(T(i, -i, xi), T(-i, j, zeta)), rhs
    raise UnitaryError(f"unknown relation {relation!r}")


def relation_indices(space: UnitarySpace, relation: str) -> list[tuple]:
    """All index patterns satisfying the side conditions of a relation."""
    om = space.omega
    roots = space.short_roots() + space.long_roots()
    if relation in ("R1", "R1-printed"):
        return space.short_roots()
    if relation == "R2":
        return roots
    if relation == "R3":
        return [(i, j, h, k) for i, j in roots for h, k in roots
                if h != j and h != -i and k != i and k != -j]
    if relation == "R4":
        return [(i, j, h) for i in om for j in om for h in om
                if i not in (j, -j) and h not in (j, -j) and i not in (h, -h)]
    if relation in ("R5", "R6", "R6-printed"):
        return space.short_roots()
    raise UnitaryError(f"unknown relation {relation!r}")


def relation_params(space: UnitarySpace, relation: str, idx: tuple):
    """Admissible parameter sets ``(xi_set, zeta_set)`` for an index pattern."""
    A = space.ring.carrier

    def root_params(i, j):
        return space.long_params(i) if j == -i else A

    if relation in ("R1", "R1-printed"):
        return A, None
    if relation == "R2":
        s = root_params(*idx)
        return s, s
    if relation == "R3":
        i, j, h, k = idx
        return root_params(i, j), root_params(h, k)
    if relation in ("R4", "R5"):
        return A, A
    if relation in ("R6", "R6-printed"):
        i, j = idx
        return space.long_params(i), A
    raise UnitaryError(f"unknown relation {relation!r}")


def steinberg_check(space: UnitarySpace, relation: str, idx: tuple, xi, zeta=None) -> bool:
    """Evaluate both sides of one relation instance; raises on violated side conditions."""
    if tuple(idx) not in set(relation_indices(space, relation)):
        raise UnitaryError(f"indices {idx} violate the side conditions of {relation}")
    xs, zs = relation_params(space, relation, tuple(idx))
    xi = space.ring.element(xi)
    if xi not in set(int(x) for x in xs):
        raise UnitaryError(f"parameter {space.ring.label(xi)} not admissible for {relation} at {idx}")
    if zeta is not None:
        zeta = space.ring.element(zeta)
        if zeta not in set(int(z) for z in zs):
            raise UnitaryError(f"parameter {space.ring.label(zeta)} not admissible for {relation} at {idx}")
    lhs, rhs = relation_sides(space, relation, tuple(idx), xi, zeta)
    return bool(np.array_equal(lhs, rhs))


def steinberg_exhaustive(space: UnitarySpace, relation: str, max_failures: int = 5):
    """Check every admissible instance; returns ``(instance_count, failures)``."""
    count = 0
    failures = []
    for idx in relation_indices(space, relation):
        xs, zs = relation_params(space, relation, idx)
        if zs is None:
            x = np.asarray(xs)
            lhs, rhs = relation_sides(space, relation, idx, x)
            pairs = [(int(a), None) for a in x]
        else:
            x, z = np.meshgrid(xs, zs, indexing="ij")
            x, z = x.ravel(), z.ravel()
            lhs, rhs = relation_sides(space, relation, idx, x, z)
            pairs = list(zip(x.tolist(), z.tolist()))
        ok = np.all(lhs == rhs, axis=(-1, -2))
        count += ok.size
        for k in np.flatnonzero(~ok)[: max(0, max_failures - len(failures))]:
            failures.append((idx, pairs[k]))
    return count, failures


# commutator identities ------------------------------------------------------------------


IDENTITIES = ("C1", "C2", "C3", "C4", "C5", "HW")


def identity_sides(space: UnitarySpace, which: str, x, y, z):
    """Both sides of a commutator identity; ``^x y = x y x^-1`` and ``[x, y] = x y x^-1 y^-1``."""
    com, cj, inv, mm = space.commutator, space.conj, space.inverse, space.matmul
    if which == "C1":
        return com(x, mm(y, z)), mm(com(x, y), cj(y, com(x, z)))
    if which == "C2":
        return com(mm(x, y), z), mm(cj(x, com(y, z)), com(x, z))
    if which in ("C3", "HW"):
        lhs = cj(x, com(inv(com(y, inv(x))), z))
        rhs = mm(cj(y, com(x, com(inv(y), z))), cj(z, com(y, com(inv(z), x))))
        if which == "HW":
            # cyclic form for these conventions: ^x[[x^-1, y], z] ^z[[z^-1, x], y] ^y[[y^-1, z], x] = e
            lhs = space.product([cj(x, com(com(inv(x), y), z)), cj(z, com(com(inv(z), x), y)),
                                 cj(y, com(com(inv(y), z), x))])
            return lhs, np.broadcast_to(space.identity, lhs.shape)
        return lhs, rhs
    if which == "C4":
        return com(x, cj(y, z)), cj(y, com(cj(inv(y), x), z))
    if which == "C5":
        return com(cj(y, x), z), cj(y, com(x, cj(inv(y), z)))
    raise UnitaryError(f"unknown identity {which!r}")


def identity_check(space: UnitarySpace, which: str, x, y, z) -> bool:
    lhs, rhs = identity_sides(space, which, x, y, z)
    return bool(np.array_equal(lhs, rhs))


def random_transvections(space: UnitarySpace, rng: np.random.Generator, count: int,
                         fi: FormIdeal | None = None) -> list[Transvection]:
    """Seeded random admissible transvections (of level ``fi`` if given)."""
    roots = space.short_roots() + space.long_roots()
    I = space.ring.carrier if fi is None else fi.I.elements
    out = []
    for _ in range(count):
        i, j = roots[int(rng.integers(len(roots)))]
        choices = space.long_params(i, None if fi is None else fi.Gamma) if j == -i else I
        out.append(Transvection(i, j, int(choices[int(rng.integers(len(choices)))])))
    return out


def quadratic_compatibility(space: UnitarySpace, max_failures: int = 5):
    """Check ``q(u+v) - q(u) - q(v) = h(u, v)`` modulo Lambda for all pairs of vectors.

    Returns ``(pair_count, failures)``.
    """
    from .rings import all_vectors

    ring = space.ring
    V = all_vectors(ring, space.N)
    q = space.form_f(V, V)
    failures = []
    for a in range(len(V)):
        u = V[a]
        w = ring.add(u[None, :], V)
        lhs = ring.sub(ring.sub(space.form_f(w, w), q[a]), q)
        d = ring.sub(lhs, space.form_h(np.broadcast_to(u, V.shape), V))
        bad = np.flatnonzero(~space.fr.Lambda.mask[d])
        for b in bad[: max(0, max_failures - len(failures))]:
            failures.append((u.tolist(), V[b].tolist()))
    return len(V) ** 2, failures
