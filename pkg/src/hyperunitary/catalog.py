"""Named ring and ideal presets used by the suites, tests and demos."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .calculus import LocalFormRing, localize_form_ring
from .form import FormIdeal, FormRing
from .rings import make_ring


class CatalogError(KeyError):
    pass


@dataclass(frozen=True)
class FiniteEntry:
    name: str
    ring: str
    lam: str
    Lambda: str
    description: str
    # ideal name -> (generator labels, parameter selector)
    ideals: dict = field(default_factory=dict)
    regression: dict = field(default_factory=dict)
    kind: str = "finite"


@dataclass(frozen=True)
class LocalEntry:
    name: str
    base: str
    lam: object
    Lambda: tuple
    t: int
    I: int
    J: int
    description: str
    kind: str = "localized"


FINITE = {
    e.name: e for e in [
        FiniteEntry("sympl-z2", "zmod:2", "1", "max", "Z/2, trivial involution, lambda = 1 = -1, Lambda = A",
                    {"A": (["1"], "max")}, {"order GU(6)": 1451520}),
        FiniteEntry("sympl-z4", "zmod:4", "3", "max", "Z/4, trivial involution, lambda = -1, Lambda = A",
                    {"A": (["1"], "max"), "2A": (["2"], "max"), "2A-min": (["2"], "min")},
                    {"order EU(6,2A,Gamma_max)": 2 ** 21, "order GU(6,2A,Gamma_max)": 2 ** 21,
                     "order EU(6,2A,Gamma_min)": 2 ** 14}),
        FiniteEntry("orth-z4", "zmod:4", "1", "min", "Z/4, trivial involution, lambda = 1, Lambda = {0}",
                    {"A": (["1"], "max"), "2A": (["2"], "max")}),
        FiniteEntry("gauss-z3", "gaussian:3", "1", "max", "Z[i]/3, conjugation, lambda = 1, Lambda = Lambda_max",
                    {"A": (["1"], "max")}),
        FiniteEntry("lin-z4", "opposite:zmod:4", "(1,1)", "max",
                    "Z/4 + (Z/4)^op with the swap involution (unitary group = GL(6, Z/4))",
                    {"A": (["(1,1)"], "max")}),
        FiniteEntry("prod-z2-z4", "product:zmod:2,zmod:4", "(1,3)", "max",
                    "Z/2 x Z/4, trivial involution, lambda = -1, Lambda = A",
                    {"A": (["(1,1)"], "max"), "I": (["(0,2)"], "max"), "J": (["(0,1)"], "max")},
                    {"order EU(6,I,Gamma_max)": 2 ** 21, "order RHS": 2 ** 21}),
        FiniteEntry("sympl-z6", "zmod:6", "5", "max", "Z/6, trivial involution, lambda = -1, Lambda = A",
                    {"A": (["1"], "max"), "2A": (["2"], "max"), "3A": (["3"], "max")}),
    ]
}

LOCAL = {
    e.name: e for e in [
        LocalEntry("dyadic-symplectic", "Z", -1, ((1, 0),), 2, 3, 5,
                   "Z[1/2], trivial involution, lambda = -1, Lambda = Z, I = 3Z, J = 5Z"),
        LocalEntry("gaussian-unitary-t2", "Z[i]", 1, ((0, 1),), 2, 3, 5,
                   "Z[i][1/2], conjugation, lambda = 1, Lambda = iZ, I = 3Z[i], J = 5Z[i]"),
    ]
}


def names() -> list[str]:
    return list(FINITE) + list(LOCAL)


def entry(name: str):
    if name in FINITE:
        return FINITE[name]
    if name in LOCAL:
        return LOCAL[name]
    raise CatalogError(f"unknown catalog instance {name!r}")


@lru_cache(maxsize=None)
def form_ring(name: str) -> FormRing:
    e = FINITE.get(name)
    if e is None:
        raise CatalogError(f"{name!r} is not a finite catalog instance")
    ring = make_ring(e.ring)
    return FormRing.build(ring, e.lam, e.Lambda, name=name)


@lru_cache(maxsize=None)
def form_ideal(name: str, ideal: str) -> FormIdeal:
    e = FINITE[name] if name in FINITE else entry(name)
    if ideal not in e.ideals:
        raise CatalogError(f"{name!r} has no ideal {ideal!r}")
    fr = form_ring(name)
    gens, gamma = e.ideals[ideal]
    return FormIdeal.build(fr, [fr.ring.element(g) for g in gens], gamma)


@lru_cache(maxsize=None)
def local_form_ring(name: str) -> LocalFormRing:
    e = LOCAL.get(name)
    if e is None:
        raise CatalogError(f"{name!r} is not a localized catalog instance")
    lfr = localize_form_ring(e.base, e.lam, list(e.Lambda), e.t, name)
    return lfr.add_ideal("I", e.I).add_ideal("J", e.J)


def listing() -> list[str]:
    out = []
    for e in FINITE.values():
        ideals = ",".join(e.ideals)
        line = f"{e.name}\tfinite\t{e.description}\tideals={ideals}"
        if e.regression:
            line += "\t" + ";".join(f"{k}={v}" for k, v in e.regression.items())
        out.append(line)
    for e in LOCAL.values():
        out.append(f"{e.name}\tlocalized\t{e.description}\tt={e.t}")
    return out
