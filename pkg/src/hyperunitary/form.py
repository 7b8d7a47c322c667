"""Form parameters, form ideals and their arithmetic."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .rings import (AdditiveSubgroup, FiniteRing, Ideal, RingError, additive_closure, ideal_closure,
                    ideal_product)

FORM_ENUM_LIMIT = 64


class FormError(ValueError):
    pass


def check_symmetry(ring: FiniteRing, lam: int) -> None:
    lam = int(lam)
    if int(ring.mul(lam, ring.conj(lam))) != ring.one:
        raise FormError(f"lambda = {ring.label(lam)} does not satisfy lambda * conj(lambda) = 1")
    if not ring.is_central(lam):
        raise FormError(f"lambda = {ring.label(lam)} is not central")


def lambda_power(ring: FiniteRing, lam: int, e: int) -> int:
    """``lam**e`` for ``e`` in ``{-1, 0, 1}``; ``lam**-1`` is ``conj(lam)``."""
    if e == 0:
        return ring.one
    if e == 1:
        return int(lam)
    if e == -1:
        return int(ring.conj(lam))
    raise FormError(f"lambda exponent {e} outside {{-1, 0, 1}}")


def scaled(ring: FiniteRing, x: np.ndarray, alphas: Iterable[int] | None = None) -> np.ndarray:
    """All ``a x conj(a)`` for ``a`` in ``alphas`` (default: the whole carrier)."""
    alphas = ring.carrier if alphas is None else np.asarray(list(alphas), dtype=np.int64)
    a, xx = np.meshgrid(alphas, np.asarray(x, dtype=np.int64), indexing="ij")
    return ring.mul(ring.mul(a, xx), ring.conj(a)).ravel()


def form_closure(ring: FiniteRing, gens) -> AdditiveSubgroup:
    """Smallest additive subgroup containing ``gens`` and stable under ``x -> a x conj(a)``."""
    group = additive_closure(ring, gens)
    while True:
        img = np.unique(scaled(ring, group.elements))
        new = img[~group.mask[img]]
        if new.size == 0:
            return AdditiveSubgroup(ring, group.mask, group.generators)
        group = additive_closure(ring, np.concatenate([group.elements, new]))


def _require_finite(ring):
    if not isinstance(ring, FiniteRing):
        raise FormError("finite ring required")


def lambda_min(ring: FiniteRing, lam: int) -> AdditiveSubgroup:
    _require_finite(ring)
    c = ring.carrier
    return additive_closure(ring, np.unique(ring.sub(c, ring.mul(lam, ring.conj(c)))))


def lambda_max(ring: FiniteRing, lam: int) -> AdditiveSubgroup:
    _require_finite(ring)
    c = ring.carrier
    mask = c == ring.neg(ring.mul(lam, ring.conj(c)))
    return AdditiveSubgroup(ring, mask, np.flatnonzero(mask))


def is_scaling_stable(ring: FiniteRing, group: AdditiveSubgroup) -> int | None:
    """Return a witness ``a`` with ``a X conj(a)`` not inside ``X``, or ``None``."""
    for a in ring.carrier:
        img = ring.mul(ring.mul(a, group.elements), ring.conj(a))
        if not np.all(group.mask[img]):
            return int(a)
    return None


def enumerate_form_parameters(ring: FiniteRing, lam: int) -> list[AdditiveSubgroup]:
    """All form parameters between ``lambda_min`` and ``lambda_max``, ordered by (size, mask)."""
    _require_finite(ring)
    if ring.order > FORM_ENUM_LIMIT:
        raise FormError(f"carrier of size {ring.order} too large for form parameter enumeration")
    check_symmetry(ring, lam)
    lo, hi = lambda_min(ring, lam), lambda_max(ring, lam)
    start = form_closure(ring, lo.elements)
    seen = {start.mask.tobytes(): start}
    queue = [start]
    while queue:
        x = queue.pop()
        for y in hi.elements[~x.mask[hi.elements]]:
            z = form_closure(ring, np.append(x.elements, y))
            key = z.mask.tobytes()
            if key not in seen:
                seen[key] = z
                queue.append(z)
    out = sorted(seen.values(), key=lambda g: (g.size, tuple(g.elements)))
    return [AdditiveSubgroup(ring, g.mask, g.elements) for g in out]


@dataclass(frozen=True, eq=False)
class FormRing:
    ring: FiniteRing
    lam: int
    Lambda: AdditiveSubgroup
    name: str = ""

    def __post_init__(self):
        ring = self.ring
        check_symmetry(ring, self.lam)
        if self.Lambda.ring is not ring:
            raise FormError("form parameter lives in a different ring")
        if not lambda_min(ring, self.lam) <= self.Lambda:
            raise FormError("form parameter does not contain lambda_min")
        if not self.Lambda <= lambda_max(ring, self.lam):
            raise FormError("form parameter is not inside lambda_max")
        w = is_scaling_stable(ring, self.Lambda)
        if w is not None:
            raise FormError(f"form parameter not stable under scaling by {ring.label(w)}")

    @classmethod
    def build(cls, ring: FiniteRing, lam, Lambda="max", name=""):
        """``Lambda`` is ``"min"``, ``"max"`` or an iterable of generators (closed under scaling)."""
        lam = ring.element(lam)
        check_symmetry(ring, lam)
        if isinstance(Lambda, str):
            if Lambda == "min":
                group = lambda_min(ring, lam)
            elif Lambda == "max":
                group = lambda_max(ring, lam)
            else:
                raise FormError(f"unknown form parameter selector {Lambda!r}")
        elif isinstance(Lambda, AdditiveSubgroup):
            group = Lambda
        else:
            group = additive_closure(ring, [ring.element(g) for g in Lambda])
        return cls(ring, lam, group, name)

    def lam_pow(self, e: int) -> int:
        return lambda_power(self.ring, self.lam, e)

    def unit_ideal(self) -> Ideal:
        return ideal_closure(self.ring, [self.ring.one], True)

    def full(self) -> "FormIdeal":
        return FormIdeal(self, self.unit_ideal(), self.Lambda)


def gamma_min(fr: FormRing, I: Ideal) -> AdditiveSubgroup:
    _check_ideal(fr, I)
    ring = fr.ring
    xi = I.elements
    first = ring.sub(xi, ring.mul(fr.lam, ring.conj(xi)))
    x, a = np.meshgrid(xi, fr.Lambda.elements, indexing="ij")
    second = ring.mul(ring.mul(x, a), ring.conj(x)).ravel()
    return additive_closure(ring, np.unique(np.concatenate([first, second])))


def gamma_max(fr: FormRing, I: Ideal) -> AdditiveSubgroup:
    _check_ideal(fr, I)
    return I & fr.Lambda


def _check_ideal(fr, I):
    if I.ring is not fr.ring:
        raise FormError("ideal lives in a different ring")
    if not I.involution_invariant:
        raise FormError("ideal is not involution invariant")


@dataclass(frozen=True)
class Violation:
    condition: str
    witness: str

    def __str__(self):
        return f"{self.condition} (witness {self.witness})"


def validate_form_ideal(fr: FormRing, I: AdditiveSubgroup, Gamma: AdditiveSubgroup) -> Violation | None:
    """Check that ``(I, Gamma)`` is a form ideal of ``fr``; return the first violation or ``None``."""
    ring = fr.ring
    if I.ring is not ring or Gamma.ring is not ring:
        return Violation("operands live in different rings", "-")
    conj_i = ring.conj(I.elements)
    bad = conj_i[~I.mask[conj_i]]
    if bad.size:
        return Violation("ideal is not involution invariant", ring.label(bad[0]))
    try:
        Ideal.of(I)
    except RingError:
        return Violation("I is not a two-sided ideal", "-")
    outside = Gamma.elements[~I.mask[Gamma.elements]]
    if outside.size:
        return Violation("Gamma is not contained in I", ring.label(outside[0]))
    outside = Gamma.elements[~fr.Lambda.mask[Gamma.elements]]
    if outside.size:
        return Violation("Gamma is not contained in Gamma_max(I) = I & Lambda", ring.label(outside[0]))
    ideal = I if isinstance(I, Ideal) else Ideal.of(I)
    lo = gamma_min(fr, ideal)
    missing = lo.elements[~Gamma.mask[lo.elements]]
    if missing.size:
        return Violation("Gamma_min(I) is not contained in Gamma", ring.label(missing[0]))
    w = is_scaling_stable(ring, Gamma)
    if w is not None:
        return Violation("Gamma is not stable under a Gamma conj(a)", ring.label(w))
    return None


@dataclass(frozen=True, eq=False)
class FormIdeal:
    fr: FormRing
    I: Ideal
    Gamma: AdditiveSubgroup

    def __post_init__(self):
        v = validate_form_ideal(self.fr, self.I, self.Gamma)
        if v is not None:
            raise FormError(f"invalid form ideal: {v}")

    @classmethod
    def build(cls, fr: FormRing, I: Ideal | Iterable[int], gamma="max") -> "FormIdeal":
        ring = fr.ring
        if not isinstance(I, Ideal):
            I = ideal_closure(ring, [ring.element(g) for g in I], True)
        if isinstance(gamma, str):
            if gamma == "min":
                G = gamma_min(fr, I)
            elif gamma == "max":
                G = gamma_max(fr, I)
            else:
                raise FormError(f"unknown parameter selector {gamma!r}")
        elif isinstance(gamma, AdditiveSubgroup):
            G = gamma
        else:
            G = additive_closure(ring, [ring.element(g) for g in gamma])
        return cls(fr, I, G)

    def __eq__(self, other):
        if not isinstance(other, FormIdeal):
            return NotImplemented
        return self.fr is other.fr and self.I == other.I and self.Gamma == other.Gamma

    def __hash__(self):
        return hash((self.I, self.Gamma))

    def __le__(self, other):
        return self.I <= other.I and self.Gamma <= other.Gamma

    def is_zero(self) -> bool:
        return self.I.size == 1

    def __repr__(self):
        return f"FormIdeal(I={self.I!r}, Gamma={self.Gamma!r})"


def form_ideal_sum(a: FormIdeal, b: FormIdeal) -> FormIdeal:
    if a.fr is not b.fr:
        raise FormError("form ideals over different form rings")
    I = a.I + b.I
    return FormIdeal(a.fr, Ideal.of(I), a.Gamma + b.Gamma)


def twisted_parameter(J: AdditiveSubgroup, Gamma: AdditiveSubgroup) -> AdditiveSubgroup:
    """The additive span of ``x g conj(x)`` over ``x`` in ``J`` and ``g`` in ``Gamma``."""
    ring = J.ring
    x, g = np.meshgrid(J.elements, Gamma.elements, indexing="ij")
    return additive_closure(ring, np.unique(ring.mul(ring.mul(x, g), ring.conj(x)).ravel()))


def symmetrized_product(a: FormIdeal, b: FormIdeal) -> FormIdeal:
    if a.fr is not b.fr:
        raise FormError("form ideals over different form rings")
    fr = a.fr
    K = ideal_product(a.I, b.I)
    G = gamma_min(fr, K) + twisted_parameter(b.I, a.Gamma) + twisted_parameter(a.I, b.Gamma)
    return FormIdeal(fr, K, G)
