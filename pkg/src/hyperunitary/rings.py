"""Small involutive rings: exact arithmetic on finite carriers.

Elements of a finite ring are integer handles ``0 .. order-1``.  Handle ``0`` is
always zero.  Arithmetic is vectorised over numpy integer arrays; rings with at
most ``TABLE_LIMIT`` elements carry dense operation tables.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

TABLE_LIMIT = 256
MAX_CARRIER = 2 ** 16


class RingError(ValueError):
    pass


def _zmod_ops(m):
    def add(a, b):
        return (a + b) % m

    def mul(a, b):
        return (a * b) % m

    def neg(a):
        return (-a) % m

    return add, mul, neg


@dataclass(eq=False)
class FiniteRing:
    """A finite ring with involution, given by vectorised structural rules."""

    name: str
    order: int
    one: int
    _add: Callable = field(repr=False)
    _mul: Callable = field(repr=False)
    _neg: Callable = field(repr=False)
    _conj: Callable = field(repr=False)
    labels: tuple = field(repr=False)
    additive_gens: tuple = field(repr=False)
    descriptor: str = ""
    involution: str = "trivial"

    def __post_init__(self):
        if not 2 <= self.order <= MAX_CARRIER:
            raise RingError(f"carrier size {self.order} out of supported range")
        self.carrier = np.arange(self.order, dtype=np.int64)
        self.dtype = np.uint8 if self.order <= 256 else np.uint16
        self.tabulated = self.order <= TABLE_LIMIT
        if self.tabulated:
            a, b = np.meshgrid(self.carrier, self.carrier, indexing="ij")
            self.add_table = self._add(a, b).astype(np.int64)
            self.mul_table = self._mul(a, b).astype(np.int64)
        self.neg_table = self._neg(self.carrier).astype(np.int64)
        self.conj_table = self._conj(self.carrier).astype(np.int64)
        self._label_index = {lab: k for k, lab in enumerate(self.labels)}

    # arithmetic -------------------------------------------------------------

    def add(self, a, b):
        if self.tabulated:
            return self.add_table[a, b]
        return self._add(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))

    def mul(self, a, b):
        if self.tabulated:
            return self.mul_table[a, b]
        return self._mul(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))

    def neg(self, a):
        return self.neg_table[a]

    def sub(self, a, b):
        return self.add(a, self.neg_table[b])

    def conj(self, a):
        return self.conj_table[a]

    def power(self, a, k):
        """``a**k`` for integer ``k >= 0``; negative powers only for ``a`` with ``a*conj(a) = 1``."""
        if k < 0:
            a, k = int(self.conj(a)), -k
            if int(self.mul(a, self.conj(a))) != self.one:
                raise RingError("negative power of a non-unitary element")
        r = self.one
        for _ in range(k):
            r = int(self.mul(r, a))
        return r

    def sum(self, values, axis=-1):
        """Fold addition along ``axis``."""
        values = np.moveaxis(np.asarray(values), axis, 0)
        out = values[0]
        for v in values[1:]:
            out = self.add(out, v)
        return out

    # labels -----------------------------------------------------------------

    def label(self, a) -> str:
        return self.labels[int(a)]

    def element(self, label) -> int:
        if isinstance(label, (int, np.integer)):
            if not 0 <= int(label) < self.order:
                raise RingError(f"handle {label} outside carrier")
            return int(label)
        key = str(label).strip().replace(" ", "")
        if key not in self._label_index:
            raise RingError(f"unknown element {label!r} in {self.name}")
        return self._label_index[key]

    # structural predicates -----------------------------------------------------

    def is_commutative(self) -> bool:
        if self.tabulated:
            return bool(np.array_equal(self.mul_table, self.mul_table.T))
        return _sampled(self, lambda a, b: self.mul(a, b) == self.mul(b, a))

    def is_central(self, x) -> bool:
        c = self.carrier
        return bool(np.all(self.mul(x, c) == self.mul(c, x)))

    def units(self) -> np.ndarray:
        c = self.carrier
        if self.tabulated:
            return np.flatnonzero((self.mul_table == self.one).any(axis=1) & (self.mul_table == self.one).any(axis=0))
        return np.array([a for a in c if np.any(self.mul(a, c) == self.one)], dtype=np.int64)

    def check_involution(self) -> str | None:
        """Return ``None`` if the involution is an order-2 anti-morphism, else the failed property."""
        c = self.carrier
        if not np.array_equal(self.conj(self.conj(c)), c):
            return "involution does not have order 2"
        if self.conj(self.one) != self.one:
            return "involution does not fix 1"
        if self.tabulated:
            a, b = np.meshgrid(c, c, indexing="ij")
            if not np.array_equal(self.conj(self.add(a, b)), self.add(self.conj(a), self.conj(b))):
                return "involution is not additive"
            if not np.array_equal(self.conj(self.mul(a, b)), self.mul(self.conj(b), self.conj(a))):
                return "involution does not reverse products"
            return None
        ok = _sampled(self, lambda a, b: (self.conj(self.add(a, b)) == self.add(self.conj(a), self.conj(b)))
                      & (self.conj(self.mul(a, b)) == self.mul(self.conj(b), self.conj(a))))
        return None if ok else "involution fails anti-morphism check"

    def check_axioms(self) -> str | None:
        c = self.carrier
        if self.order <= TABLE_LIMIT and self.order <= 64:
            a, b, d = np.meshgrid(c, c, c, indexing="ij")
        else:
            rng = np.random.default_rng(0)
            a, b, d = (rng.integers(0, self.order, 20000) for _ in range(3))
        if np.any(self.add(a, 0) != a) or np.any(self.mul(a, self.one) != a) or np.any(self.mul(self.one, a) != a):
            return "identity elements"
        if np.any(self.add(a, self.neg(a)) != 0):
            return "additive inverses"
        if np.any(self.add(a, b) != self.add(b, a)):
            return "addition not commutative"
        if np.any(self.add(self.add(a, b), d) != self.add(a, self.add(b, d))):
            return "addition not associative"
        if np.any(self.mul(self.mul(a, b), d) != self.mul(a, self.mul(b, d))):
            return "multiplication not associative"
        if np.any(self.mul(a, self.add(b, d)) != self.add(self.mul(a, b), self.mul(a, d))):
            return "left distributivity"
        if np.any(self.mul(self.add(a, b), d) != self.add(self.mul(a, d), self.mul(b, d))):
            return "right distributivity"
        return None

    def __repr__(self):
        return f"FiniteRing({self.name!r}, order={self.order})"


def _sampled(ring, pred, count=20000):
    rng = np.random.default_rng(0)
    a = rng.integers(0, ring.order, count)
    b = rng.integers(0, ring.order, count)
    return bool(np.all(pred(a, b)))


# constructors ---------------------------------------------------------------------


def zmod(m: int, involution: str = "trivial") -> FiniteRing:
    if m < 2:
        raise RingError("modulus must be at least 2")
    if involution not in ("trivial", "conjugate"):
        raise RingError(f"involution {involution!r} not available on Z/{m}")
    add, mul, neg = _zmod_ops(m)
    return FiniteRing(f"Z/{m}", m, 1 % m, add, mul, neg, lambda a: np.asarray(a),
                      tuple(str(k) for k in range(m)), (1,), f"zmod:{m}", "trivial")


def gaussian(m: int, involution: str = "conjugate") -> FiniteRing:
    """``Z[i]/m``; element ``x + y i`` has handle ``x + m*y``."""
    if m < 2:
        raise RingError("modulus must be at least 2")
    if involution not in ("trivial", "conjugate"):
        raise RingError(f"involution {involution!r} not available on Z[i]/{m}")

    def split(a):
        a = np.asarray(a, dtype=np.int64)
        return a % m, a // m

    def add(a, b):
        (x, y), (u, v) = split(a), split(b)
        return (x + u) % m + m * ((y + v) % m)

    def mul(a, b):
        (x, y), (u, v) = split(a), split(b)
        return (x * u - y * v) % m + m * ((x * v + y * u) % m)

    def neg(a):
        x, y = split(a)
        return (-x) % m + m * ((-y) % m)

    if involution == "conjugate":
        def conj(a):
            x, y = split(a)
            return x + m * ((-y) % m)
    else:
        def conj(a):
            return np.asarray(a, dtype=np.int64)

    labels = tuple(_gauss_label(h % m, h // m) for h in range(m * m))
    return FiniteRing(f"Z[i]/{m}", m * m, 1, add, mul, neg, conj, labels, (1, m),
                      f"gaussian:{m}", involution)


def _gauss_label(x, y):
    if y == 0:
        return str(x)
    yi = "i" if y == 1 else f"{y}i"
    return yi if x == 0 else f"{x}+{yi}"


def dual_numbers(m: int, involution: str = "trivial") -> FiniteRing:
    """``(Z/m)[e]/(e^2)``; ``a + b e`` has handle ``a + m*b``; the conjugate involution sends e to -e."""
    if m < 2:
        raise RingError("modulus must be at least 2")

    def split(a):
        a = np.asarray(a, dtype=np.int64)
        return a % m, a // m

    def add(a, b):
        (x, y), (u, v) = split(a), split(b)
        return (x + u) % m + m * ((y + v) % m)

    def mul(a, b):
        (x, y), (u, v) = split(a), split(b)
        return (x * u) % m + m * ((x * v + y * u) % m)

    def neg(a):
        x, y = split(a)
        return (-x) % m + m * ((-y) % m)

    if involution == "conjugate":
        def conj(a):
            x, y = split(a)
            return x + m * ((-y) % m)
    elif involution == "trivial":
        def conj(a):
            return np.asarray(a, dtype=np.int64)
    else:
        raise RingError(f"involution {involution!r} not available on dual numbers")

    def lab(h):
        x, y = h % m, h // m
        if y == 0:
            return str(x)
        ye = "e" if y == 1 else f"{y}e"
        return ye if x == 0 else f"{x}+{ye}"

    return FiniteRing(f"Z/{m}[e]", m * m, 1, add, mul, neg, conj, tuple(lab(h) for h in range(m * m)),
                      (1, m), f"dual:{m}", involution)


def product(first: FiniteRing, second: FiniteRing) -> FiniteRing:
    """Direct product with componentwise operations and involution; ``(a, b)`` has handle ``a + |first|*b``."""
    n1 = first.order

    def split(h):
        h = np.asarray(h, dtype=np.int64)
        return h % n1, h // n1

    def join(a, b):
        return np.asarray(a, dtype=np.int64) + n1 * np.asarray(b, dtype=np.int64)

    def add(a, b):
        (x, y), (u, v) = split(a), split(b)
        return join(first.add(x, u), second.add(y, v))

    def mul(a, b):
        (x, y), (u, v) = split(a), split(b)
        return join(first.mul(x, u), second.mul(y, v))

    def neg(a):
        x, y = split(a)
        return join(first.neg(x), second.neg(y))

    def conj(a):
        x, y = split(a)
        return join(first.conj(x), second.conj(y))

    order = n1 * second.order
    labels = tuple(f"({first.label(h % n1)},{second.label(h // n1)})" for h in range(order))
    gens = tuple(int(g) for g in join(list(first.additive_gens), [0] * len(first.additive_gens))) + \
        tuple(int(g) for g in join([0] * len(second.additive_gens), list(second.additive_gens)))
    inv = first.involution if first.involution == second.involution else "componentwise"
    return FiniteRing(f"{first.name}x{second.name}", order, int(join(first.one, second.one)), add, mul, neg, conj,
                      labels, gens, f"product:{first.descriptor},{second.descriptor}", inv)


def opposite_pair(base: FiniteRing) -> FiniteRing:
    """``R + R^op`` with the swap involution ``(a, b) -> (b, a)``; the unitary group over it is ``GL(2n, R)``."""
    n1 = base.order

    def split(h):
        h = np.asarray(h, dtype=np.int64)
        return h % n1, h // n1

    def join(a, b):
        return np.asarray(a, dtype=np.int64) + n1 * np.asarray(b, dtype=np.int64)

    def add(a, b):
        (x, y), (u, v) = split(a), split(b)
        return join(base.add(x, u), base.add(y, v))

    def mul(a, b):
        (x, y), (u, v) = split(a), split(b)
        return join(base.mul(x, u), base.mul(v, y))

    def neg(a):
        x, y = split(a)
        return join(base.neg(x), base.neg(y))

    def conj(a):
        x, y = split(a)
        return join(y, x)

    order = n1 * n1
    labels = tuple(f"({base.label(h % n1)},{base.label(h // n1)})" for h in range(order))
    gens = tuple(int(join(g, 0)) for g in base.additive_gens) + tuple(int(join(0, g)) for g in base.additive_gens)
    return FiniteRing(f"{base.name}+op", order, int(join(base.one, base.one)), add, mul, neg, conj, labels, gens,
                      f"opposite:{base.descriptor}", "swap")


def make_ring(desc: str, involution: str | None = None) -> FiniteRing:
    """Build a validated finite ring from a textual descriptor.

    Accepted forms: ``zmod:4``, ``gaussian:3``, ``dual:2``, ``opposite:zmod:4`` and
    ``product:<desc>,<desc>``.  ``involution`` is ``trivial``, ``conjugate`` or ``swap``;
    when omitted, each kind uses its natural involution.
    """
    desc = desc.strip()
    kind, _, rest = desc.partition(":")
    try:
        if kind == "zmod":
            ring = zmod(int(rest), involution or "trivial")
        elif kind == "gaussian":
            ring = gaussian(int(rest), involution or "conjugate")
        elif kind == "dual":
            ring = dual_numbers(int(rest), involution or "trivial")
        elif kind == "opposite":
            if involution not in (None, "swap"):
                raise RingError("opposite-pair rings carry the swap involution")
            ring = opposite_pair(make_ring(rest))
        elif kind == "product":
            left, right = _split_product(rest)
            sub_inv = involution if involution in ("trivial", "conjugate") else None
            ring = product(make_ring(left, sub_inv), make_ring(right, sub_inv))
        else:
            raise RingError(f"unsupported ring kind {kind!r}")
    except ValueError as exc:
        if isinstance(exc, RingError):
            raise
        raise RingError(f"bad ring descriptor {desc!r}: {exc}") from exc
    problem = ring.check_involution()
    if problem:
        raise RingError(f"{ring.name}: {problem}")
    if involution == "trivial" and not ring.is_commutative():
        raise RingError("trivial involution on a non-commutative ring is not an anti-morphism")
    return ring


def _split_product(rest: str):
    # components may themselves be products, so take the first comma whose left side parses
    parts = rest.split(",")
    for k in range(1, len(parts)):
        left, right = ",".join(parts[:k]), ",".join(parts[k:])
        try:
            make_ring(left)
            make_ring(right)
        except RingError:
            continue
        return left, right
    raise RingError(f"cannot split product descriptor {rest!r}")


# additive subgroups and ideals -------------------------------------------------------


class AdditiveSubgroup:
    """An additive subgroup of a finite ring, stored as a membership mask."""

    def __init__(self, ring: FiniteRing, mask: np.ndarray, generators: Sequence[int] = ()):
        self.ring = ring
        self.mask = np.asarray(mask, dtype=bool)
        self.mask.setflags(write=False)
        self.generators = tuple(int(g) for g in generators)

    @property
    def elements(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    def __len__(self):
        return self.size

    def __contains__(self, x) -> bool:
        return bool(self.mask[int(x)])

    def contains(self, x):
        return self.mask[np.asarray(x, dtype=np.int64)]

    def issubset(self, other: "AdditiveSubgroup") -> bool:
        return bool(np.all(other.mask[self.mask]))

    def __le__(self, other):
        return self.issubset(other)

    def __eq__(self, other):
        if not isinstance(other, AdditiveSubgroup):
            return NotImplemented
        return self.ring is other.ring and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash((id(self.ring), self.mask.tobytes()))

    def __add__(self, other: "AdditiveSubgroup") -> "AdditiveSubgroup":
        _same_ring(self, other)
        return additive_closure(self.ring, np.concatenate([self.elements, other.elements]))

    def __and__(self, other: "AdditiveSubgroup") -> "AdditiveSubgroup":
        _same_ring(self, other)
        mask = self.mask & other.mask
        return AdditiveSubgroup(self.ring, mask, np.flatnonzero(mask))

    def labels(self):
        return [self.ring.label(x) for x in self.elements]

    def __repr__(self):
        body = ", ".join(self.labels()) if self.size <= 16 else f"{self.size} elements"
        return f"{{{body}}}"


class Ideal(AdditiveSubgroup):
    """A two-sided ideal; ``involution_invariant`` records whether it is stable under the involution."""

    def __init__(self, ring, mask, generators=(), involution_invariant=False):
        super().__init__(ring, mask, generators)
        self.involution_invariant = involution_invariant

    @classmethod
    def of(cls, group: AdditiveSubgroup, check: bool = True) -> "Ideal":
        ring = group.ring
        if check:
            x = group.elements
            for r in ring.additive_gens + (ring.one,):
                if not (np.all(group.mask[ring.mul(r, x)]) and np.all(group.mask[ring.mul(x, r)])):
                    raise RingError("subgroup is not a two-sided ideal")
        inv = bool(np.all(group.mask[ring.conj(group.elements)]))
        return cls(ring, group.mask, group.generators, inv)


def _same_ring(a, b):
    if a.ring is not b.ring:
        raise RingError("operands live in different rings")


def _require_finite(ring):
    if not isinstance(ring, FiniteRing):
        raise RingError("closure operations need a finite carrier")


def additive_closure(ring: FiniteRing, gens: Iterable[int]) -> AdditiveSubgroup:
    """Smallest additive subgroup containing ``gens``."""
    _require_finite(ring)
    gens = [int(g) for g in np.asarray(list(gens), dtype=np.int64).ravel()]
    mask = np.zeros(ring.order, dtype=bool)
    mask[0] = True
    for g in gens:
        if mask[g]:
            continue
        mask = _adjoin(ring, mask, g)
    return AdditiveSubgroup(ring, mask, gens)


def _adjoin(ring, mask, g):
    # S + <g> for a subgroup S: add multiples of g until they fall back into S
    elems = np.flatnonzero(mask)
    out = mask.copy()
    shift = g
    while not mask[shift]:
        out[ring.add(elems, shift)] = True
        shift = int(ring.add(shift, g))
    return out


def ideal_closure(ring: FiniteRing, gens: Iterable[int], involution_invariant: bool = False) -> Ideal:
    """Smallest two-sided ideal containing ``gens`` (and their conjugates if ``involution_invariant``)."""
    _require_finite(ring)
    gens = [int(g) for g in np.asarray(list(gens), dtype=np.int64).ravel()]
    seeds = list(gens)
    if involution_invariant:
        seeds += [int(ring.conj(g)) for g in gens]
    mult = tuple(ring.additive_gens)
    group = additive_closure(ring, seeds)
    while True:
        x = group.elements
        extra = [ring.mul(r, x) for r in mult] + [ring.mul(x, r) for r in mult]
        if involution_invariant:
            extra.append(ring.conj(x))
        extra = np.unique(np.concatenate(extra))
        new = extra[~group.mask[extra]]
        if new.size == 0:
            break
        group = additive_closure(ring, np.concatenate([x, new]))
    return Ideal(ring, group.mask, gens, bool(np.all(group.mask[ring.conj(group.elements)])))


def zero_ideal(ring: FiniteRing) -> Ideal:
    return ideal_closure(ring, [], True)


def unit_ideal(ring: FiniteRing) -> Ideal:
    return ideal_closure(ring, [ring.one], True)


def ideal_product(I: AdditiveSubgroup, J: AdditiveSubgroup) -> Ideal:
    """The symmetrised product ``IJ + JI``."""
    _same_ring(I, J)
    ring = I.ring
    x, y = np.meshgrid(I.elements, J.elements, indexing="ij")
    prods = np.concatenate([ring.mul(x, y).ravel(), ring.mul(y, x).ravel()])
    return ideal_closure(ring, np.unique(prods), involution_invariant=False)


def all_vectors(ring: FiniteRing, length: int) -> np.ndarray:
    """Every vector of ``ring**length`` as rows of an array (lexicographic in handles)."""
    grids = np.meshgrid(*([ring.carrier] * length), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def iter_subsets(items, max_size=None):
    items = list(items)
    top = len(items) if max_size is None else max_size
    for k in range(top + 1):
        yield from itertools.combinations(items, k)
