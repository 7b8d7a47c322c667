"""Exact arithmetic in principal localisations ``Z_t`` and ``Z[i]_t``.

A ``LocalScalar`` is ``(x + y i) / t**k`` with the numerator reduced so that
``t`` does not divide it (unless the value is zero, stored as ``0 / t**0``).
``t`` is a nonzero rational integer, so it is fixed by complex conjugation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


class LocalError(ValueError):
    pass


@dataclass(frozen=True)
class LocalScalar:
    x: int
    y: int
    k: int
    ring: "LocalizedRing"

    # arithmetic ----------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, LocalScalar):
            if other.ring is not self.ring:
                raise LocalError("operands belong to different localized rings")
            return other
        if isinstance(other, int):
            return self.ring(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = self.ring.t
        k = max(self.k, other.k)
        a, b = t ** (k - self.k), t ** (k - other.k)
        return self.ring.make(self.x * a + other.x * b, self.y * a + other.y * b, k)

    __radd__ = __add__

    def __neg__(self):
        return LocalScalar(-self.x, -self.y, self.k, self.ring)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        x = self.x * other.x - self.y * other.y
        y = self.x * other.y + self.y * other.x
        return self.ring.make(x, y, self.k + other.k)

    __rmul__ = __mul__

    def conj(self):
        if self.ring.gaussian:
            return LocalScalar(self.x, -self.y, self.k, self.ring)
        return self

    def scale_t(self, e: int) -> "LocalScalar":
        """Multiply by ``t**e``."""
        if self.is_zero():
            return self
        return LocalScalar(self.x, self.y, self.k - e, self.ring)

    # queries ----------------------------------------------------------------------

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def valuation(self):
        """``t``-adic valuation; ``None`` stands for the valuation of zero."""
        return None if self.is_zero() else -self.k

    def is_integral(self) -> bool:
        return self.is_zero() or self.k <= 0

    def integral_coords(self):
        """``(x, y)`` of an integral value."""
        if not self.is_integral():
            raise LocalError(f"{self} is not integral")
        f = self.ring.t ** (-self.k) if not self.is_zero() else 0
        return self.x * f, self.y * f

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring(other)
        if not isinstance(other, LocalScalar):
            return NotImplemented
        return (self.x, self.y, self.k) == (other.x, other.y, other.k) and self.ring is other.ring

    def __hash__(self):
        return hash((self.x, self.y, self.k))

    def as_fractions(self):
        d = Fraction(self.ring.t) ** self.k
        return Fraction(self.x) / d, Fraction(self.y) / d

    def __str__(self):
        if self.ring.gaussian and self.y:
            num = f"({self.x}{self.y:+d}i)"
        else:
            num = str(self.x)
        if self.k < 0:
            s = LocalScalar(self.x * self.ring.t ** -self.k, self.y * self.ring.t ** -self.k, 0, self.ring)
            return str(s)
        return num if self.k == 0 else f"{num}/{self.ring.t}^{self.k}"

    __repr__ = __str__


class LocalizedRing:
    """``Z_t`` (trivial involution) or ``Z[i]_t`` (complex conjugation)."""

    def __init__(self, base: str = "Z", t: int = 2):
        if base not in ("Z", "Z[i]"):
            raise LocalError(f"unsupported integral base {base!r}")
        if not isinstance(t, int):
            raise LocalError("t must be a rational integer so that conj(t) = t")
        if t in (0, 1, -1):
            raise LocalError("t must be a nonzero non-unit")
        self.base = base
        self.t = t
        self.gaussian = base == "Z[i]"
        self.zero = LocalScalar(0, 0, 0, self)
        self.one = self.make(1, 0, 0)
        self.i = self.make(0, 1, 0) if self.gaussian else None

    def make(self, x: int, y: int = 0, k: int = 0) -> LocalScalar:
        """``(x + y i) / t**k`` in reduced form."""
        if y and not self.gaussian:
            raise LocalError("imaginary part in Z_t")
        if x == 0 and y == 0:
            return self.zero
        t = self.t
        while x % t == 0 and y % t == 0:
            x //= t
            y //= t
            k -= 1
        return LocalScalar(x, y, k, self)

    def __call__(self, x: int, y: int = 0) -> LocalScalar:
        return self.make(x, y, 0)

    def t_power(self, e: int) -> LocalScalar:
        return self.make(1, 0, -e)

    def __repr__(self):
        return f"LocalizedRing({self.base}, t={self.t})"


class IntegralLattice:
    """A subgroup of ``Z`` or ``Z[i] = Z^2`` given by generators, with exact membership."""

    def __init__(self, ring: LocalizedRing, gens):
        self.ring = ring
        self.gens = [tuple(g) if isinstance(g, tuple) else (int(g), 0) for g in gens]
        self.basis = _hnf(self.gens)

    def contains(self, x: int, y: int = 0) -> bool:
        return _in_lattice(self.basis, x, y)

    def contains_scalar(self, a: LocalScalar) -> bool:
        if not a.is_integral():
            return False
        return self.contains(*a.integral_coords())

    def conj(self) -> "IntegralLattice":
        return IntegralLattice(self.ring, [(x, -y) for x, y in self.gens])

    def __repr__(self):
        return f"IntegralLattice({self.basis})"


def _hnf(gens):
    # upper-triangular basis [(a, b), (0, c)] of the lattice spanned by gens in Z^2
    rows = [list(g) for g in gens if g != (0, 0)]
    a, b = 0, 0
    col2 = 0
    for x, y in rows:
        # merge (x, y) into the first row via extended gcd on the first coordinate
        if x == 0:
            col2 = math.gcd(col2, y)
            continue
        if a == 0:
            a, b = x, y
            continue
        g, s, u = _egcd(a, x)
        na, nb = g, s * b + u * y
        # the row orthogonal combination has zero first coordinate
        col2 = math.gcd(col2, (x // g) * b - (a // g) * y)
        a, b = na, nb
    if a < 0:
        a, b = -a, -b
    if col2:
        b %= col2
    return a, b, abs(col2)


def _egcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, s, u = _egcd(b, a % b)
    return g, u, s - (a // b) * u


def _in_lattice(basis, x, y):
    a, b, c = basis
    if a == 0:
        if x != 0:
            return False
        p = 0
    else:
        if x % a:
            return False
        p = x // a
    r = y - p * b
    return r == 0 if c == 0 else r % c == 0
