"""Conjugation and commutator calculus over principal localisations.

Given a transvection with a denominator ``t^m`` and a transvection deep in a
``t``-adic neighbourhood, the builders below produce explicit factorisations
(certificates) of the conjugate or commutator into elements of the relative
subgroups ``FU_nat(2n, t^l I, t^l Gamma)`` (the normal closure of
``FU(2n, t^l I, t^l Gamma)`` in ``FU(2n, t^l A, t^l Lambda)``) or of the mixed
commutator ``[FU_nat(t^l I), FU_nat(t^l J)]``.  Every certificate is checked
by exact matrix multiplication over ``A_t``.

Parameters are tracked as ``t^e * core`` with an integral core, so the level
claim of a factor is the declared exponent ``e``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .localized import IntegralLattice, LocalError, LocalizedRing, LocalScalar
from .unitary import eps

SIDES = ("A", "I", "J")


class CalculusError(ValueError):
    pass


# localized form rings ---------------------------------------------------------------------


@dataclass(eq=False)
class LocalFormRing:
    """``(A_t, Lambda_t)`` for ``A = Z`` or ``Z[i]``, with form ideals ``(I, Gamma)`` and ``(J, Delta)``."""

    R: LocalizedRing
    lam: LocalScalar
    Lambda: IntegralLattice
    ideals: dict = field(default_factory=dict)
    name: str = ""

    def lam_pow(self, e: int) -> LocalScalar:
        if e == 0:
            return self.R.one
        if e == 1:
            return self.lam
        if e == -1:
            return self.lam.conj()
        raise CalculusError(f"lambda exponent {e} outside {{-1, 0, 1}}")

    def twist(self, i: int) -> LocalScalar:
        """Long root parameters at ``i`` lie in ``twist(i) * Lambda``."""
        return self.lam_pow(-(eps(i) + 1) // 2)

    def add_ideal(self, side: str, d: int, gamma: str = "max"):
        """Attach the principal ideal ``d A`` with ``Gamma_max = d Lambda`` (or ``Gamma_min``)."""
        R = self.R
        if side not in ("I", "J"):
            raise CalculusError("ideal sides are I and J")
        gens = [(d, 0), (0, d)] if R.gaussian else [(d, 0)]
        ideal = IntegralLattice(R, gens)
        if gamma == "max":
            param = IntegralLattice(R, [(d * x, d * y) for x, y in self.Lambda.gens])
        elif gamma == "min":
            basis = [R(1), R.i] if R.gaussian else [R(1)]
            pg = []
            for b in basis:
                xi = b * d
                v = xi - self.lam * xi.conj()
                pg.append(v.integral_coords())
                for g in self.Lambda.gens:
                    w = xi * R.make(*g) * xi.conj()
                    pg.append(w.integral_coords())
            param = IntegralLattice(R, pg)
        else:
            raise CalculusError(f"unknown parameter selector {gamma!r}")
        self.ideals[side] = (d, ideal, param)
        return self

    def lattices(self, side: str):
        """``(ideal, parameter)`` lattices for a side."""
        if side == "A":
            gens = [(1, 0), (0, 1)] if self.R.gaussian else [(1, 0)]
            return IntegralLattice(self.R, gens), self.Lambda
        if side not in self.ideals:
            raise CalculusError(f"no ideal attached for side {side}")
        _, ideal, param = self.ideals[side]
        return ideal, param

    def in_side(self, side: str, core: LocalScalar, long_index: int | None = None) -> bool:
        ideal, param = self.lattices(side)
        if not core.is_integral():
            return False
        if long_index is None:
            return ideal.contains_scalar(core)
        # core in twist(i) * param  <=>  twist(i)^-1 core in param
        return param.contains_scalar(self.twist(long_index).conj() * core)


def localize_form_ring(base: str, lam, Lambda_gens, t=2, name: str = "") -> LocalFormRing:
    """Localized view of ``(A, Lambda)`` with ``A = Z`` (trivial involution) or ``Z[i]`` (conjugation)."""
    if isinstance(t, complex):
        if t.imag != 0:
            raise CalculusError("localization base must satisfy conj(t) = t")
        t = int(t.real)
    if isinstance(t, tuple):
        if t[1] != 0:
            raise CalculusError("localization base must satisfy conj(t) = t")
        t = t[0]
    try:
        R = LocalizedRing(base, int(t))
    except LocalError as exc:
        raise CalculusError(str(exc)) from exc
    lam = R.make(*lam) if isinstance(lam, tuple) else R(int(lam))
    if lam * lam.conj() != R.one:
        raise CalculusError("lambda * conj(lambda) must be 1")
    gens = [tuple(g) if isinstance(g, tuple) else (int(g), 0) for g in Lambda_gens]
    for g in gens:
        a = R.make(*g)
        if a != -(lam * a.conj()):
            raise CalculusError(f"{a} is not in Lambda_max")
    Lam = IntegralLattice(R, gens)
    basis = [R(1), R.i] if R.gaussian else [R(1)]
    for b in basis:
        if not Lam.contains_scalar(b - lam * b.conj()):
            raise CalculusError("Lambda does not contain Lambda_min")
    return LocalFormRing(R, lam, Lam, {}, name)


# parameters ------------------------------------------------------------------------------------


@dataclass(frozen=True)
class P:
    """The value ``t^exp * core``."""

    exp: int
    core: LocalScalar

    def value(self) -> LocalScalar:
        return self.core.scale_t(self.exp)

    def __mul__(self, other):
        if isinstance(other, LocalScalar):
            return P(self.exp, self.core * other)
        return P(self.exp + other.exp, self.core * other.core)

    def __rmul__(self, other):
        if isinstance(other, LocalScalar):
            return P(self.exp, other * self.core)
        return NotImplemented

    def __neg__(self):
        return P(self.exp, -self.core)

    def conj(self):
        return P(self.exp, self.core.conj())

    def __add__(self, other):
        e = min(self.exp, other.exp)
        return P(e, self.core.scale_t(self.exp - e) + other.core.scale_t(other.exp - e))

    def __sub__(self, other):
        return self + (-other)

    def __str__(self):
        return f"t^{self.exp}*{self.core}"


# transvections and factors ------------------------------------------------------------------


@dataclass(frozen=True)
class LocalTransvection:
    """``T_ij(t^exp * core)`` with a claimed side: the core lies in the side's ideal (or its twisted parameter)."""

    i: int
    j: int
    exp: int
    core: LocalScalar
    side: str = "A"

    @property
    def is_long(self) -> bool:
        return self.j == -self.i

    @property
    def param(self) -> P:
        return P(self.exp, self.core)

    def value(self) -> LocalScalar:
        return self.core.scale_t(self.exp)

    def inverse(self) -> "LocalTransvection":
        return replace(self, core=-self.core)

    def __str__(self):
        return f"T({self.i},{self.j}; t^{self.exp}*{self.core}; {self.side})"


def LT(i, j, p: P, side: str) -> LocalTransvection:
    return LocalTransvection(i, j, p.exp, p.core, side)


@dataclass(frozen=True)
class Elem:
    t: LocalTransvection


@dataclass(frozen=True)
class Conj:
    """``c x c^-1`` with ``c`` the product of ``context`` and ``x`` the product of ``inner``."""

    context: tuple
    inner: tuple


@dataclass(frozen=True)
class Bracket:
    """``[L, R]`` (or its inverse ``[R, L]``) with ``L`` in the I-side and ``R`` in the J-side subgroup."""

    left: tuple
    right: tuple
    inverse: bool = False


def inverse_factor(f):
    if isinstance(f, Elem):
        return Elem(f.t.inverse())
    if isinstance(f, Conj):
        return Conj(f.context, inverse_factors(f.inner))
    if isinstance(f, Bracket):
        return Bracket(f.left, f.right, not f.inverse)
    raise TypeError(f)


def inverse_factors(fs) -> tuple:
    return tuple(inverse_factor(f) for f in reversed(tuple(fs)))


def flatten(fs) -> list[LocalTransvection]:
    """The transvection word whose product equals the product of the factors."""
    out = []
    for f in fs:
        if isinstance(f, Elem):
            out.append(f.t)
        elif isinstance(f, Conj):
            c = flatten(f.context)
            out += c + flatten(f.inner) + [x.inverse() for x in reversed(c)]
        elif isinstance(f, Bracket):
            L, R = flatten(f.left), flatten(f.right)
            w = L + R + [x.inverse() for x in reversed(L)] + [x.inverse() for x in reversed(R)]
            out += [x.inverse() for x in reversed(w)] if f.inverse else w
        else:
            raise TypeError(f)
    return out


def declared_level(fs):
    """Least declared exponent over all transvections in a factor tree (``None`` if there are none)."""
    levels = [t.exp for t in flatten_unique(fs)]
    return min(levels) if levels else None


def flatten_unique(fs):
    out = []
    for f in fs:
        if isinstance(f, Elem):
            out.append(f.t)
        elif isinstance(f, Conj):
            out += flatten_unique(f.context) + flatten_unique(f.inner)
        elif isinstance(f, Bracket):
            out += flatten_unique(f.left) + flatten_unique(f.right)
    return out


# exact matrices over A_t ----------------------------------------------------------------------


class LocalSpace:
    """Exact 2n x 2n matrices over a localized form ring, with the Chevalley commutator rules."""

    def __init__(self, lfr: LocalFormRing, n: int = 3):
        if n < 3:
            raise CalculusError("the calculus needs n >= 3")
        self.lfr = lfr
        self.R = lfr.R
        self.n = n
        self.N = 2 * n
        self.omega = list(range(1, n + 1)) + list(range(-n, 0))

    def pos(self, i):
        return i - 1 if i > 0 else self.N + i

    def sign(self, i, j) -> LocalScalar:
        return self.lfr.lam_pow((eps(j) - eps(i)) // 2)

    def identity(self):
        z, o = self.R.zero, self.R.one
        return [[o if a == b else z for b in range(self.N)] for a in range(self.N)]

    def right_mul(self, M, t: LocalTransvection):
        """``M T`` in place."""
        v = t.value()
        if v.is_zero():
            return M
        pi, pj = self.pos(t.i), self.pos(t.j)
        cols = [(pi, pj, v)]
        if not t.is_long:
            c = -(self.sign(t.i, t.j) * v.conj())
            cols.append((self.pos(-t.j), self.pos(-t.i), c))
        old = {src: [M[r][src] for r in range(self.N)] for src, _, _ in cols}
        for src, dst, c in cols:
            for r in range(self.N):
                if not old[src][r].is_zero():
                    M[r][dst] = M[r][dst] + old[src][r] * c
        return M

    def evaluate(self, word: Sequence[LocalTransvection]):
        M = self.identity()
        for t in word:
            self.right_mul(M, t)
        return M

    def matrix_of(self, fs):
        return self.evaluate(flatten(fs))

    def r1(self, i, j, p: P) -> P:
        """``T_ij(x) = T_-j,-i(r1(x))``."""
        return -(self.sign(i, j) * p.conj())

    def reps(self, i, j, p: P):
        if j == -i:
            return [(i, j, p)]
        return [(i, j, p), (-j, -i, self.r1(i, j, p))]

    def chev(self, x, y):
        """``[T_x, T_y]`` as a list of ``(i, j, P)``; ``None`` for opposite roots."""
        (i, j, X), (h, k, Y) = x, y
        lam_pow = self.lfr.lam_pow
        xl, yl = j == -i, k == -h
        if xl and yl:
            return None if h == -i else []
        if xl:
            for a, b, Z in self.reps(h, k, Y):
                if a == -i:
                    long = -(lam_pow((eps(i) + eps(b)) // 2) * (Z.conj() * X * Z))
                    return [(i, b, X * Z), (-b, b, long)]
            return []
        if yl:
            r = self.chev(y, x)
            return None if r is None else invert_list(r)
        for a, b, _ in self.reps(i, j, X):
            for c, d, _ in self.reps(h, k, Y):
                if (c, d) == (b, a):
                    return None
        for a, b, X1 in self.reps(i, j, X):
            for c, d, Y1 in self.reps(h, k, Y):
                if b == c and d != a:
                    if d == -a:
                        return [(a, -a, X1 * Y1 - lam_pow(-eps(a)) * (Y1.conj() * X1.conj()))]
                    return [(a, d, X1 * Y1)]
                if d == a and c != b:
                    if b == -c:
                        return invert_list([(c, -c, Y1 * X1 - lam_pow(-eps(c)) * (X1.conj() * Y1.conj()))])
                    return invert_list([(c, b, Y1 * X1)])
        return []


def invert_list(items):
    return [(i, j, -p) for i, j, p in reversed(items)]


# case tags ----------------------------------------------------------------------------------------


CONG_TAGS = ("I(1)(i)", "I(1)(ii)", "I(1)(iii)", "I(1)(iv)", "I(2)", "I(3)", "I(4)",
             "II(1)", "II(2)", "II(3)", "III(1)", "III(2)", "III(3)", "IV(1)", "IV(2)")
COMM_TAGS = CONG_TAGS


def _short_grid(i, j, h, k):
    if i != k and j != h:
        if i != -h and j != -k:
            return "I(1)(i)"
        if i == -h and j != -k:
            return "I(1)(ii)"
        if i != -h and j == -k:
            return "I(1)(iii)"
        return "I(1)(iv)"
    if i == k and j != h:
        return "I(2)"
    if i != k and j == h:
        return "I(3)"
    return "I(4)"


def cong_tag(c: LocalTransvection, x: LocalTransvection) -> str:
    i, j, h, k = c.i, c.j, x.i, x.j
    if not c.is_long and not x.is_long:
        return _short_grid(i, j, h, k)
    if c.is_long and not x.is_long:
        if h != -i and k != i:
            return "II(1)"
        return "II(2)" if h == -i else "II(3)"
    if not c.is_long and x.is_long:
        if i != -h and j != h:
            return "III(1)"
        return "III(2)" if i == -h else "III(3)"
    return "IV(1)" if h != -i else "IV(2)"


def comm_tag(a: LocalTransvection, b: LocalTransvection) -> str:
    i, j, h, k = a.i, a.j, b.i, b.j
    if not a.is_long and not b.is_long:
        return _short_grid(i, j, h, k)
    if not a.is_long and b.is_long:
        if i != -h and j != h:
            return "II(1)"
        return "II(2)" if i == -h else "II(3)"
    if a.is_long and not b.is_long:
        if i != -h and i != k:
            return "III(1)"
        return "III(2)" if i == -h else "III(3)"
    return "IV(1)" if i != -h else "IV(2)"


COMMUTING = {"I(1)(i)", "II(1)", "III(1)", "IV(1)"}


def aux_index(n: int, avoid, sign: int | None = None) -> int:
    """Least positive index outside ``avoid`` (up to sign), negated to have sign ``sign`` if given."""
    bad = {abs(x) for x in avoid}
    for q in range(1, n + 1):
        if q not in bad:
            return q if sign is None or sign > 0 else -q
    raise CalculusError("no auxiliary index available")


# certificates -----------------------------------------------------------------------------------------


@dataclass
class Decomposition:
    lemma: str
    tag: str
    operation: str
    operands: tuple
    input_word: tuple
    factors: tuple
    claim: str
    l: int
    m: int
    p: int | None
    q: int | None = None
    lfr_name: str = ""

    @property
    def achieved_level(self):
        return declared_level(self.factors)


def _side_of(lfr, t: LocalTransvection):
    return t.side


class _Builder:
    def __init__(self, space: LocalSpace):
        self.sp = space
        self.lfr = space.lfr
        self.n = space.n
        self.q_used = None

    # conjugation ------------------------------------------------------------------------------

    def conj(self, c: LocalTransvection, x: LocalTransvection):
        """Factors of ``c x c^-1`` in the natural subgroup of ``x.side``."""
        sp = self.sp
        tag = cong_tag(c, x)
        side = x.side
        if tag in COMMUTING:
            return [Elem(x)]
        if tag in ("I(1)(iv)", "I(4)"):
            return self._conj_opposite_short(c, x)
        if tag == "IV(2)":
            return self._conj_opposite_long(c, x)
        # ^c x = x [x^-1, c]
        rest = sp.chev((x.i, x.j, -x.param), (c.i, c.j, c.param))
        if rest is None:
            raise CalculusError(f"unexpected opposite pattern in case {tag}")
        return [Elem(x)] + [Elem(LT(a, b, p, side)) for a, b, p in rest]

    def _conj_opposite_short(self, c, x):
        sp = self.sp
        i, j = c.i, c.j
        side = x.side
        # rewrite the target as T_ji
        if (x.i, x.j) == (j, i):
            X = x.param
        else:
            X = sp.r1(x.i, x.j, x.param)
        q = aux_index(self.n, (i, j))
        self.q_used = q
        e1 = X.exp // 2
        e2 = X.exp - e1
        R = self.lfr.R
        u = LocalTransvection(j, q, e1, R.one, "A")
        v = LocalTransvection(q, i, e2, X.core, side)
        cu = self.conj(c, u)
        cv = self.conj(c, v)
        # [cu, cv] = ^cu(cv) * cv^-1
        return [Conj(tuple(cu), tuple(cv))] + list(inverse_factors(cv))

    def _conj_opposite_long(self, c, x):
        sp = self.sp
        i = c.i
        side = x.side
        R = self.lfr.R
        q = aux_index(self.n, (i,), sign=eps(-i))
        self.q_used = q
        e = x.exp
        r = e // 4
        zeta = P(r, R.one)
        probe = sp.chev((q, -q, P(e - 2 * r, R.one)), (-q, i, zeta))
        kappa = probe[1][2]
        if kappa.exp != e or (probe[1][0], probe[1][1]) != (-i, i):
            raise CalculusError("unexpected shape in the long-root expansion")
        k_inv = kappa.core.conj()
        if kappa.core * k_inv != R.one:
            raise CalculusError("long-root coefficient is not a unit")
        Y = P(e - 2 * r, x.core * k_inv)
        expansion = sp.chev((q, -q, Y), (-q, i, zeta))
        s_i, s_j, s_p = expansion[0]
        S_inv = LT(s_i, s_j, -s_p, side)
        A_ = LT(q, -q, Y, side)
        B_ = LT(-q, i, zeta, "A")
        cS = self.conj(c, S_inv)
        w = self.conj(c, B_)
        return list(cS) + [Elem(A_), Conj(tuple(w), (Elem(A_.inverse()),))]

    # commutators -----------------------------------------------------------------------------------

    def comm(self, a: LocalTransvection, b: LocalTransvection):
        """Factors of ``[a, b]`` in ``[FU_nat(I), FU_nat(J)]``; ``a`` is I-side, ``b`` is J-side."""
        sp = self.sp
        tag = comm_tag(a, b)
        if tag in COMMUTING:
            return []
        if tag in ("I(1)(ii)", "I(1)(iii)", "I(2)", "I(3)"):
            e1 = a.exp // 2
            e2 = a.exp - e1
            return [Bracket((Elem(replace(a, exp=e1)),), (Elem(replace(b, exp=b.exp + e2)),))]
        if tag in ("I(1)(iv)", "I(4)"):
            return self._comm_opposite_short(a, b)
        if tag == "II(3)":
            # R1 on a turns the pattern into II(2)
            X = sp.r1(a.i, a.j, a.param)
            return self.comm(LT(-a.j, -a.i, X, a.side), b)
        if tag == "II(2)":
            return self._comm_short_long(a, b)
        if tag == "III(3)":
            Y = sp.r1(b.i, b.j, b.param)
            return self.comm(a, LT(-b.j, -b.i, Y, b.side))
        if tag == "III(2)":
            return self._comm_long_short(a, b)
        if tag == "IV(2)":
            return self._comm_opposite_long(a, b)
        raise CalculusError(f"no rule for tag {tag}")

    def _split_bracket(self, i, j, s: int, x_core, y_core, q, x_first: bool, x_exp=None):
        """``T_ij(t^s x y)`` as ``[T_iq(t^s1 x), T_qj(t^s2 y)]`` with an I/J orientation.

        ``x_first`` says the I-side letter is ``T_iq``; otherwise the bracket is stored inverted.
        """
        s1 = s // 2 if x_exp is None else x_exp
        s2 = s - s1
        left = LocalTransvection(i, q, s1, x_core, "I" if x_first else "J")
        right = LocalTransvection(q, j, s2, y_core, "J" if x_first else "I")
        if x_first:
            return Bracket((Elem(left),), (Elem(right),))
        return Bracket((Elem(right),), (Elem(left),), inverse=True)

    def _comm_opposite_short(self, a, b):
        sp = self.sp
        i, j = a.i, a.j
        R = self.lfr.R
        if (b.i, b.j) == (j, i):
            B = b.param
        else:
            B = sp.r1(b.i, b.j, b.param)
        q = aux_index(self.n, (i, j))
        self.q_used = q
        e1 = a.exp // 2
        e2 = a.exp - e1
        x = LocalTransvection(i, q, e1, a.core, "I")
        y = LocalTransvection(q, j, e2, R.one, "A")
        z = LT(j, i, B, "J")
        # g = ^x( ^y[x^-1, [y^-1, z]] * ^z[y, [z^-1, x^-1]] )
        v1 = sp.chev((y.i, y.j, -y.param), (z.i, z.j, z.param))
        assert v1 is not None and len(v1) == 1
        f1 = Conj((Elem(replace(x, side="A")), Elem(y)),
                  (Bracket((Elem(x.inverse()),), (Elem(LT(*v1[0], "J")),)),))
        v2 = sp.chev((z.i, z.j, -z.param), (x.i, x.j, -x.param))
        assert v2 is not None and len(v2) == 1
        (wi, wj, wp) = v2[0]
        s = wp.exp
        s1 = s // 2
        s2 = s - s1
        # T_jq(t^s B a) = [T_ji(t^s1 B), T_iq(t^s2 a)]: J-side first, stored as an inverted bracket
        tj = LocalTransvection(j, i, s1, B.core, "J")
        ti = LocalTransvection(i, q, s2, a.core, "I")
        zy = self.conj(z, y)
        zW = Bracket(tuple(self.conj(z, ti)), tuple(self.conj(z, tj)), inverse=True)
        inner = (Conj(tuple(zy), (zW,)), inverse_factor(zW))
        f2 = Conj((Elem(replace(x, side="A")),), inner)
        return [f1, f2]

    def _comm_short_long(self, a, b):
        """Case II(2): ``a = T_ij`` short, ``b = T_-i,i`` long."""
        sp = self.sp
        i, j = a.i, a.j
        m = -b.exp
        e = a.exp
        q = aux_index(self.n, (i, j))
        self.q_used = q
        # [b, a] = T_-i,j(B A) T_-j,j(L), so g^-1 = that product
        ba = sp.chev((b.i, b.j, b.param), (a.i, a.j, a.param))
        (si, sj, sp_), (li, lj, lp) = ba
        assert (si, sj) == (-i, j) and (li, lj) == (-j, j)
        M = (2 * e - m) // 3
        Mp = 2 * e - m - 2 * M
        # T_-j,j(L) = T_-i,j(-t^{M+M'} B A) [T_-i,i(t^M' beta), T_ij(t^M alpha)]
        first = self._split_bracket(-i, j, sp_.exp, b.core, a.core, q, x_first=False)
        second = self._split_bracket(-i, j, M + Mp, -b.core, a.core, q, x_first=False, x_exp=M)
        third = Bracket((Elem(LocalTransvection(i, j, M, a.core, "I")),),
                        (Elem(LocalTransvection(-i, i, Mp, b.core, "J")),), inverse=True)
        g_inv = [first, second, third]
        return list(inverse_factors(g_inv))

    def _comm_long_short(self, a, b):
        """Case III(2): ``a = T_i,-i`` long, ``b = T_-i,k`` short."""
        i, k = a.i, b.j
        e = a.exp
        m = -b.exp
        if e % 4:
            raise CalculusError("case III(2) needs a long-root exponent divisible by 4")
        r = e // 4
        q = aux_index(self.n, (i, k))
        self.q_used = q
        f1 = self._split_bracket(i, k, e - m, a.core, b.core, q, x_first=True, x_exp=e - m - (e - m) // 2)
        f2 = self._split_bracket(i, k, 3 * r - m, a.core, -b.core, q, x_first=True,
                                 x_exp=3 * r - m - (3 * r - m) // 2)
        f3 = Bracket((Elem(LocalTransvection(i, -i, 2 * r, a.core, "I")),),
                     (Elem(LocalTransvection(-i, k, r - m, b.core, "J")),))
        return [f1, f2, f3]

    def _comm_opposite_long(self, a, b):
        """Case IV(2): ``a = T_i,-i``, ``b = T_-i,i``."""
        sp = self.sp
        i = a.i
        R = self.lfr.R
        e = a.exp
        r = e // 4
        q = aux_index(self.n, (i,), sign=eps(-i))
        self.q_used = q
        zeta = P(r, R.one)
        # w = [T_iq(t^r), T_q,-q(Y)] = T_i,-i(t^e alpha) T_q,-i(..)^-1 for the right Y
        probe = sp.chev((i, q, zeta), (q, -q, P(e - 2 * r, R.one)))
        long = [x for x in probe if x[1] == -x[0]]
        if len(long) != 1 or (long[0][0], long[0][1]) != (i, -i) or long[0][2].exp != e:
            raise CalculusError("unexpected shape in the long-root expansion")
        kappa = long[0][2].core
        k_inv = kappa.conj()
        if kappa * k_inv != R.one:
            raise CalculusError("long-root coefficient is not a unit")
        Y = P(e - 2 * r, a.core * k_inv)
        w = sp.chev((i, q, zeta), (q, -q, Y))
        short = [x for x in w if x[1] != -x[0]]
        assert len(short) == 1
        x0 = LT(short[0][0], short[0][1], -short[0][2], "I")
        y1 = LT(i, q, zeta, "A")
        x1 = LT(q, -q, Y, "I")
        v = sp.chev((i, q, -zeta), (b.i, b.j, b.param))
        inner = Bracket((Elem(x1),), tuple(Elem(LT(vi, vj, vp, "J")) for vi, vj, vp in v))
        first = Conj((Elem(replace(x0, side="A")),), (Conj((Elem(y1),), (inner,)),))
        second = self.comm(x0, b)
        return [first] + list(second)


# public operations ----------------------------------------------------------------------------------


def _check_operand(lfr, t: LocalTransvection, what: str):
    if t.i == t.j or t.i == 0 or t.j == 0:
        raise CalculusError(f"{what}: bad indices")
    if not lfr.in_side(t.side, t.core, t.i if t.is_long else None):
        raise CalculusError(f"{what}: core {t.core} is not in the {t.side}-side set")


def _p_of(exp: int):
    return exp // 4 if exp % 4 == 0 else None


def conj_decompose(space: LocalSpace, conjugator: LocalTransvection, target: LocalTransvection, l: int,
                   check_bound: bool = True) -> Decomposition:
    """Certificate that ``^conjugator target`` lies in ``FU_nat(2n, t^l X, t^l Xi)`` for the target's side."""
    lfr = space.lfr
    _check_operand(lfr, conjugator, "conjugator")
    _check_operand(lfr, target, "target")
    m = max(0, -conjugator.exp)
    tag = cong_tag(conjugator, target)
    p = _p_of(target.exp)
    if check_bound:
        if p is None:
            raise CalculusError("target exponent must be 4p")
        need = required_p("cong", tag, l, m)
        if p < need:
            raise CalculusError(f"p = {p} is below the bound {need} for cong {tag} at l = {l}, m = {m}")
    b = _Builder(space)
    factors = tuple(b.conj(conjugator, target))
    inp = (conjugator, target, conjugator.inverse())
    return Decomposition("cong", tag, "conj", (conjugator, target), inp, factors, target.side, l, m, p,
                         b.q_used, lfr.name)


def comm_decompose(space: LocalSpace, a: LocalTransvection, b: LocalTransvection, l: int,
                   check_bound: bool = True) -> Decomposition:
    """Certificate that ``[a, b]`` lies in ``[FU_nat(t^l I, t^l Gamma), FU_nat(t^l J, t^l Delta)]``."""
    lfr = space.lfr
    _check_operand(lfr, a, "first operand")
    _check_operand(lfr, b, "second operand")
    if a.side != "I" or b.side != "J":
        raise CalculusError("commutator operands must be I-side and J-side")
    m = max(0, -b.exp)
    tag = comm_tag(a, b)
    p = _p_of(a.exp)
    if check_bound:
        if p is None:
            raise CalculusError("first operand exponent must be 4p")
        need = required_p("comm", tag, l, m)
        if p < need:
            raise CalculusError(f"p = {p} is below the bound {need} for comm {tag} at l = {l}, m = {m}")
    bld = _Builder(space)
    factors = tuple(bld.comm(a, b))
    inp = (a, b, a.inverse(), b.inverse())
    return Decomposition("comm", tag, "comm", (a, b), inp, factors, "BR", l, m, p, bld.q_used, lfr.name)


def conj_decompose_word(space: LocalSpace, conjugator: LocalTransvection, targets: Sequence[LocalTransvection],
                        l: int, check_bound: bool = True) -> Decomposition:
    """``^c (x_1 ... x_k)`` as the concatenation of the letterwise certificates."""
    lfr = space.lfr
    _check_operand(lfr, conjugator, "conjugator")
    sides = {t.side for t in targets}
    if len(sides) > 1:
        raise CalculusError("a word must come from one side")
    factors = []
    tags, ps = [], []
    for t in targets:
        d = conj_decompose(space, conjugator, t, l, check_bound)
        factors += d.factors
        tags.append(d.tag)
        ps.append(d.p)
    m = max(0, -conjugator.exp)
    inp = (conjugator,) + tuple(targets) + (conjugator.inverse(),)
    side = sides.pop() if sides else "I"
    return Decomposition("cong2", ",".join(tags), "conj-word", (conjugator,) + tuple(targets), inp,
                         tuple(factors), side, l, m, min((p for p in ps if p is not None), default=None),
                         None, lfr.name)


def _closure_factors(space, conjugator, pairs, l, check_bound):
    out = []
    word = []
    for context, core in pairs:
        ctx = []
        for t in context:
            if t.side != "A":
                raise CalculusError("context letters must be ambient (A-side)")
            ctx += conj_decompose(space, conjugator, t, l, check_bound).factors
        inner = conj_decompose(space, conjugator, core, l, check_bound).factors
        out.append(Conj(tuple(ctx), tuple(inner)))
        word += list(context) + [core] + [x.inverse() for x in reversed(context)]
    return out, word


def conj_decompose_closure(space: LocalSpace, conjugator: LocalTransvection, pairs, l: int,
                           check_bound: bool = True) -> Decomposition:
    """``^c`` of a product of ``^w x`` (``w`` ambient words, ``x`` level transvections): ``^(^c w)(^c x)``."""
    lfr = space.lfr
    _check_operand(lfr, conjugator, "conjugator")
    factors, word = _closure_factors(space, conjugator, pairs, l, check_bound)
    m = max(0, -conjugator.exp)
    inp = (conjugator,) + tuple(word) + (conjugator.inverse(),)
    side = pairs[0][1].side if pairs else "I"
    return Decomposition("cong3", "closure", "conj-closure", (conjugator, tuple(pairs)), inp, tuple(factors),
                         side, l, m, None, None, lfr.name)


def conj_commutator(space: LocalSpace, conjugator: LocalTransvection, left_pairs, right_word, l: int,
                    check_bound: bool = True) -> Decomposition:
    """``^c [x, y]`` with ``x`` in ``FU_nat(t^p I)`` (as context/core pairs) and ``y`` a J-side word."""
    lfr = space.lfr
    _check_operand(lfr, conjugator, "conjugator")
    left, lword = _closure_factors(space, conjugator, left_pairs, l, check_bound)
    right = []
    for t in right_word:
        if t.side != "J":
            raise CalculusError("right word letters must be J-side")
        right += conj_decompose(space, conjugator, t, l, check_bound).factors
    rword = list(right_word)
    inner = lword + rword + [x.inverse() for x in reversed(lword)] + [x.inverse() for x in reversed(rword)]
    m = max(0, -conjugator.exp)
    factors = (Bracket(tuple(left), tuple(right)),) if left and right else ()
    inp = (conjugator,) + tuple(inner) + (conjugator.inverse(),)
    return Decomposition("cong4", "bracket", "conj-bracket", (conjugator, tuple(left_pairs), tuple(right_word)),
                         inp, factors, "BR", l, m, None, None, lfr.name)


# verification -----------------------------------------------------------------------------------------


@dataclass
class Verdict:
    ok: bool
    message: str = "ok"
    entry: tuple | None = None

    def __bool__(self):
        return self.ok


def _check_claims(lfr, fs, cls: str, l: int, path: str):
    for k, f in enumerate(fs):
        where = f"{path}[{k}]"
        if isinstance(f, Elem):
            t = f.t
            if cls == "BR":
                return f"{where}: bare transvection where a bracket is required"
            if cls != "A" and t.side != cls:
                return f"{where}: {t.side}-side letter where {cls}-side is required"
            if t.exp < l:
                return f"{where}: declared exponent {t.exp} below level {l}"
            v = t.value()
            if not v.is_zero() and v.valuation() < t.exp:
                return f"{where}: value valuation {v.valuation()} below declared exponent {t.exp}"
            if not lfr.in_side(t.side, t.core, t.i if t.is_long else None):
                return f"{where}: core {t.core} not in the {t.side}-side set"
        elif isinstance(f, Conj):
            err = _check_claims(lfr, f.context, "A", l, where + ".context")
            if err:
                return err
            err = _check_claims(lfr, f.inner, cls, l, where + ".inner")
            if err:
                return err
        elif isinstance(f, Bracket):
            if cls != "BR":
                return f"{where}: bracket where a {cls}-side element is required"
            err = _check_claims(lfr, f.left, "I", l, where + ".left")
            if err:
                return err
            err = _check_claims(lfr, f.right, "J", l, where + ".right")
            if err:
                return err
        else:
            return f"{where}: unknown factor"
    return None


def verify_decomposition(space: LocalSpace, d: Decomposition) -> Verdict:
    """Multiply out both sides exactly and check every level and membership claim."""
    lhs = space.evaluate(d.input_word)
    rhs = space.matrix_of(d.factors)
    for r in range(space.N):
        for c in range(space.N):
            if lhs[r][c] != rhs[r][c]:
                return Verdict(False, f"product mismatch at entry ({r + 1},{c + 1}): "
                                      f"input {lhs[r][c]} vs certificate {rhs[r][c]}", (r, c))
    err = _check_claims(space.lfr, d.factors, d.claim, d.l, "factors")
    if err:
        return Verdict(False, err)
    return Verdict(True)


# bounds -------------------------------------------------------------------------------------------------


BOUND_ANCHORS = {
    ("cong", "I(1)(iv)"): lambda l, m: -(-(l + m) // 2),
    ("comm", "II(2)"): lambda l, m: _ceil_max((m + l) / 4 + 1, (3 * l + m) / 8 + 1),
    ("comm", "III(2)"): lambda l, m: m + l,
    ("comm", "IV(2)"): lambda l, m: l + m + 1,
}


def _ceil_max(*xs):
    import math

    return math.ceil(max(xs))


_LEVEL_CACHE: dict = {}


def canonical_instance(lfr: LocalFormRing, lemma: str, tag: str, p: int, m: int, n: int = 3):
    """A fixed operand pair of the given case, with unit-like cores, for bound computations."""
    pats = index_patterns(lemma, tag, n)
    (i, j), (h, k) = pats[0]
    return _make_operands(lfr, lemma, (i, j), (h, k), p, m, None)


def achieved_level(lfr: LocalFormRing, lemma: str, tag: str, p: int, m: int, n: int = 3):
    """Least declared exponent of the mechanical certificate (``None`` when there are no factors)."""
    key = (id(lfr), lemma, tag, p, m, n)
    if key not in _LEVEL_CACHE:
        space = LocalSpace(lfr, n)
        x, y = canonical_instance(lfr, lemma, tag, p, m, n)
        b = _Builder(space)
        fs = b.conj(x, y) if lemma == "cong" else b.comm(x, y)
        _LEVEL_CACHE[key] = declared_level(fs)
    return _LEVEL_CACHE[key]


_DEFAULT_LFR = None


def _default_lfr():
    global _DEFAULT_LFR
    if _DEFAULT_LFR is None:
        _DEFAULT_LFR = localize_form_ring("Z", -1, [1], 2, "dyadic-symplectic").add_ideal("I", 3).add_ideal("J", 5)
    return _DEFAULT_LFR


def required_p(lemma: str, tag: str, l: int, m: int, lfr: LocalFormRing | None = None) -> int:
    """Least ``p >= 0`` whose mechanical certificate has every declared exponent ``>= l``."""
    if l < 0 or m < 0:
        raise CalculusError("l and m must be nonnegative")
    lfr = _default_lfr() if lfr is None else lfr
    for p in range(0, 4 * (l + m) + 8):
        lev = achieved_level(lfr, lemma, tag, p, m)
        if lev is None or lev >= l:
            return p
    raise CalculusError(f"no p found for {lemma} {tag} at l = {l}, m = {m}")


def anchor_bound(lemma: str, tag: str, l: int, m: int):
    f = BOUND_ANCHORS.get((lemma, tag))
    return None if f is None else f(l, m)


# instances ------------------------------------------------------------------------------------------------


def index_patterns(lemma: str, tag: str, n: int = 3):
    """All ``((i, j), (h, k))`` operand index pairs of a case, in a fixed order."""
    om = list(range(1, n + 1)) + list(range(-n, 0))
    roots = [(i, j) for i in om for j in om if i != j]
    tagger = cong_tag if lemma == "cong" else comm_tag
    out = []
    for i, j in roots:
        for h, k in roots:
            x = LocalTransvection(i, j, 0, None, "A")
            y = LocalTransvection(h, k, 0, None, "A")
            if tagger(x, y) == tag:
                out.append(((i, j), (h, k)))
    return out


def _random_core(lfr, side, long_index, rng, bound=9):
    R = lfr.R
    if side == "A":
        scale = 1
    else:
        scale = lfr.ideals[side][0]
    while True:
        if long_index is None:
            x = int(rng.integers(-bound, bound + 1))
            y = int(rng.integers(-bound, bound + 1)) if R.gaussian else 0
            core = R.make(x * scale, y * scale)
        else:
            _, param = lfr.lattices(side)
            comb = R.zero
            for g in param.gens:
                comb = comb + R.make(*g) * int(rng.integers(-bound, bound + 1))
            core = lfr.twist(long_index) * comb
        if not core.is_zero():
            return core


def _make_operands(lfr, lemma, ij, hk, p, m, rng):
    R = lfr.R
    (i, j), (h, k) = ij, hk
    if lemma == "cong":
        if rng is None:
            a = lfr.twist(i) * R.make(*lfr.Lambda.gens[0]) if j == -i else R.one
            d = lfr.ideals["I"][0]
            alpha = lfr.twist(h) * R.make(*lfr.ideals["I"][2].gens[0]) if k == -h else R(d)
        else:
            a = _random_core(lfr, "A", i if j == -i else None, rng)
            alpha = _random_core(lfr, "I", h if k == -h else None, rng)
        return LocalTransvection(i, j, -m, a, "A"), LocalTransvection(h, k, 4 * p, alpha, "I")
    if rng is None:
        alpha = lfr.twist(i) * R.make(*lfr.ideals["I"][2].gens[0]) if j == -i else R(lfr.ideals["I"][0])
        beta = lfr.twist(h) * R.make(*lfr.ideals["J"][2].gens[0]) if k == -h else R(lfr.ideals["J"][0])
    else:
        alpha = _random_core(lfr, "I", i if j == -i else None, rng)
        beta = _random_core(lfr, "J", h if k == -h else None, rng)
    return LocalTransvection(i, j, 4 * p, alpha, "I"), LocalTransvection(h, k, -m, beta, "J")


def random_instance(lfr: LocalFormRing, lemma: str, tag: str, l: int, m: int, rng, n: int = 3, extra_p: int = 0):
    """Seeded random operands for a case at the least admissible ``p`` (plus ``extra_p``)."""
    pats = index_patterns(lemma, tag, n)
    ij, hk = pats[int(rng.integers(len(pats)))]
    p = required_p(lemma, tag, l, m, lfr) + extra_p
    return _make_operands(lfr, lemma, ij, hk, p, m, rng)


# serialization -------------------------------------------------------------------------------------------


def _fmt_t(t: LocalTransvection):
    return f"T({t.i},{t.j},{t.core},{t.exp},{t.side})"


def _fmt_factors(fs, depth=1):
    pad = "  " * depth
    lines = []
    for f in fs:
        if isinstance(f, Elem):
            lines.append(f"{pad}elem {_fmt_t(f.t)}")
        elif isinstance(f, Conj):
            lines.append(f"{pad}conj")
            lines.append(f"{pad}  context")
            lines += _fmt_factors(f.context, depth + 2)
            lines.append(f"{pad}  inner")
            lines += _fmt_factors(f.inner, depth + 2)
        elif isinstance(f, Bracket):
            lines.append(f"{pad}bracket{' inverse' if f.inverse else ''}")
            lines.append(f"{pad}  left")
            lines += _fmt_factors(f.left, depth + 2)
            lines.append(f"{pad}  right")
            lines += _fmt_factors(f.right, depth + 2)
    return lines


def serialize_decomposition(d: Decomposition, verdict: Verdict | None = None) -> str:
    ops = []
    for o in d.operands:
        if isinstance(o, LocalTransvection):
            ops.append(_fmt_t(o))
        else:
            ops.append(str(o))
    lines = [f"certificate lemma={d.lemma} case={d.tag} ring={d.lfr_name}",
             f"  p={d.p} l={d.l} m={d.m} q={d.q} level={d.achieved_level} claim={d.claim}",
             f"  operation={d.operation} operands={' '.join(ops)}",
             "  factors"]
    lines += _fmt_factors(d.factors, 2)
    if verdict is not None:
        lines.append(f"  verdict={'ok' if verdict.ok else 'FAIL: ' + verdict.message}")
    return "\n".join(lines)
