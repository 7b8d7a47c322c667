"""Verification suites behind the command line harness.

Each suite takes a flat configuration section and returns a list of records.
Records carry no timing data so that reports are byte-identical across reruns.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import catalog
from .calculus import (COMM_TAGS, CONG_TAGS, BOUND_ANCHORS, LocalSpace, comm_decompose, conj_decompose,
                       anchor_bound, random_instance, required_p, serialize_decomposition, verify_decomposition)
from .form import FormError, gamma_max, symmetrized_product
from .rings import ideal_product
from .subgroups import (CapExceeded, DEFAULT_CAP, Engine, GeneratedSubgroup, elementary_subgroup, fu_generators,
                        generate, gu2_blocks, gu_congruence_subgroup, level_of, load_cache, mixed_commutator,
                        normal_closure, sample_gu, save_cache, subgroup_equal, subgroup_leq, z_generators)
from .unitary import (IDENTITIES, RELATIONS, UnitarySpace, identity_sides, quadratic_compatibility,
                      random_transvections, steinberg_exhaustive)

SUITES = ("steinberg", "identities", "relations-n2-n3", "subgroups", "theorem1", "levels", "absolute-formula",
          "comaximal", "calculus")

PASS, FAIL, CAP = "pass", "fail", "cap"


class ConfigError(ValueError):
    pass


@dataclass
class Record:
    suite: str
    instance: str
    check: str
    status: str
    counts: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)

    def to_line(self) -> str:
        data = {"suite": self.suite, "instance": self.instance, "check": self.check, "status": self.status,
                "counts": self.counts, "witnesses": self.witnesses}
        return json.dumps(data, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_line(cls, line: str) -> "Record":
        d = json.loads(line)
        return cls(d["suite"], d["instance"], d["check"], d["status"], d["counts"], d["witnesses"])


@dataclass
class Context:
    seed: int = 0
    cap: int = DEFAULT_CAP
    workers: int = 1
    cache: str | None = None


# config helpers ------------------------------------------------------------------------------------


def _get(cfg, key, default=None):
    v = cfg.get(key, default)
    if v is None:
        raise ConfigError(f"missing key {key!r}")
    return v


def _int(cfg, key, default):
    try:
        return int(cfg.get(key, default))
    except ValueError as exc:
        raise ConfigError(f"key {key!r} must be an integer") from exc


def _list(cfg, key, default):
    raw = cfg.get(key, default)
    return [x.strip() for x in str(raw).split(",") if x.strip()]


def _ring(name):
    try:
        return catalog.form_ring(name)
    except (KeyError, FormError) as exc:
        raise ConfigError(f"unknown or invalid ring {name!r}") from exc


def _ideal(ring, name):
    try:
        return catalog.form_ideal(ring, name)
    except (KeyError, FormError) as exc:
        raise ConfigError(f"unknown ideal {name!r} for {ring!r}") from exc


def _rng(ctx: Context, *labels) -> np.random.Generator:
    """A generator seeded from the run seed and a stable label, independent of evaluation order."""
    tag = [ord(c) for c in "/".join(str(x) for x in labels)]
    return np.random.default_rng([ctx.seed] + tag)


def _cached(ctx: Context, eng: Engine, key: str, build) -> GeneratedSubgroup:
    if ctx.cache is None:
        return build()
    os.makedirs(ctx.cache, exist_ok=True)
    path = os.path.join(ctx.cache, key + ".grp")
    if os.path.exists(path):
        try:
            return load_cache(path, eng)[1]
        except ValueError:
            pass
    group = build()
    save_cache(path, group, {"key": key})
    return group


def _fmt(sp, g):
    return sp.serialize(np.asarray(g))


# suites -------------------------------------------------------------------------------------------------


def suite_steinberg(cfg, ctx, name="steinberg", ns=None):
    rings = _list(cfg, "rings", "sympl-z4,orth-z4,gauss-z3,sympl-z2")
    rels = _list(cfg, "relations", ",".join(RELATIONS))
    ns = ns or [_int(cfg, "n", 3)]
    out = []
    for r in rings:
        fr = _ring(r)
        for n in ns:
            sp = UnitarySpace(fr, n)
            for rel in rels:
                count, failures = steinberg_exhaustive(sp, rel)
                wit = [f"indices={list(idx)} params={list(p)}" for idx, p in failures]
                out.append(Record(name, f"{r}/n={n}", rel, FAIL if failures else PASS,
                                  {"instances": count, "failures": len(failures)}, wit))
    return out


def suite_relations(cfg, ctx):
    ns = [int(x) for x in _list(cfg, "ns", "2,3")]
    return suite_steinberg(cfg, ctx, "relations-n2-n3", ns)


def suite_identities(cfg, ctx):
    rings = _list(cfg, "rings", "sympl-z4,orth-z4,gauss-z3,sympl-z2,lin-z4,prod-z2-z4")
    samples = _int(cfg, "samples", 10000)
    n = _int(cfg, "n", 3)
    out = []
    for r in rings:
        sp = UnitarySpace(_ring(r), n)
        rng = _rng(ctx, "identities", r)
        ts = random_transvections(sp, rng, 3 * samples)
        X = np.stack([sp.transvection_matrix(t) for t in ts]).reshape(samples, 3, sp.N, sp.N)
        for w in IDENTITIES:
            lhs, rhs = identity_sides(sp, w, X[:, 0], X[:, 1], X[:, 2])
            bad = np.flatnonzero(~np.all(lhs == rhs, axis=(-1, -2)))
            wit = [" ".join(str(ts[3 * k + a]) for a in range(3)) for k in bad[:5]]
            out.append(Record("identities", f"{r}/n={n}", w, FAIL if bad.size else PASS,
                              {"triples": samples, "failures": int(bad.size)}, wit))
    for r in _list(cfg, "quadratic", "sympl-z4"):
        sp = UnitarySpace(_ring(r), n)
        count, failures = quadratic_compatibility(sp)
        out.append(Record("identities", f"{r}/n={n}", "quadratic", FAIL if failures else PASS,
                          {"pairs": count, "failures": len(failures)}, [str(f) for f in failures]))
    return out


def symplectic_order(q: int, n: int) -> int:
    """``|Sp(2n, q)| = q^(n^2) prod_{i<=n} (q^(2i) - 1)``."""
    out = q ** (n * n)
    for i in range(1, n + 1):
        out *= q ** (2 * i) - 1
    return out


def suite_subgroups(cfg, ctx):
    out = []
    n = _int(cfg, "n", 3)
    r = cfg.get("order_ring", "sympl-z2")
    if r:
        fr = _ring(r)
        sp = UnitarySpace(fr, n)
        eng = Engine(sp, ctx.workers)
        full = fr.full()
        G = _cached(ctx, eng, f"{r}-FU", lambda: generate(eng, fu_generators(sp, full), ctx.cap, "FU"))
        expected = catalog.entry(r).regression.get("order GU(6)")
        formula = symplectic_order(fr.ring.order, n) if fr.ring.order == 2 else None
        ok = G.order == expected and (formula is None or formula == G.order)
        out.append(Record("subgroups", r, "order", PASS if ok else FAIL,
                          {"order": G.order, "regression": expected, "formula": formula}))
        GU = gu_congruence_subgroup(eng, full, ctx.cap)
        out.append(Record("subgroups", r, "EU=GU", PASS if subgroup_equal(G, GU) else FAIL,
                          {"EU": G.order, "GU": GU.order}))
    r = cfg.get("genelm_ring", "sympl-z4")
    if r:
        ideal = cfg.get("genelm_ideal", "2A")
        fr = _ring(r)
        sp = UnitarySpace(fr, n)
        eng = Engine(sp, ctx.workers)
        fi = _ideal(r, ideal)
        EU = _cached(ctx, eng, f"{r}-EU-{ideal}", lambda: elementary_subgroup(eng, fi, ctx.cap))
        Z = generate(eng, z_generators(sp, fi), ctx.cap, "Z")
        out.append(Record("subgroups", f"{r}/{ideal}", "genelm", PASS if subgroup_equal(Z, EU) else FAIL,
                          {"generate(z)": Z.order, "EU": EU.order}))
    return out


def _prod_setup(cfg, ctx, default_ring="prod-z2-z4"):
    r = cfg.get("ring", default_ring)
    n = _int(cfg, "n", 3)
    fr = _ring(r)
    sp = UnitarySpace(fr, n)
    eng = Engine(sp, ctx.workers)
    fi = _ideal(r, cfg.get("I", "I"))
    fj = _ideal(r, cfg.get("J", "J"))
    amb = fu_generators(sp, fr.full())
    key = f"{r}-RHS-{cfg.get('I', 'I')}-{cfg.get('J', 'J')}"

    def build():
        EUI = elementary_subgroup(eng, fi, ctx.cap)
        return mixed_commutator(eng, EUI, fu_generators(sp, fj), amb, ctx.cap, check_normal=False)

    RHS = _cached(ctx, eng, key, build)
    return r, sp, eng, fi, fj, amb, RHS


def _fu_words(sp, gens, rng, count, max_len=3):
    out = np.empty((count, sp.N, sp.N), dtype=np.int64)
    for k in range(count):
        length = int(rng.integers(1, max_len + 1))
        mats = [sp.transvection_matrix(gens[int(rng.integers(len(gens)))], check=False) for _ in range(length)]
        out[k] = sp.product(mats)
    return out


def suite_theorem1(cfg, ctx):
    r, sp, eng, fi, fj, amb, RHS = _prod_setup(cfg, ctx)
    samples = _int(cfg, "samples", 1000)
    out = [Record("theorem1", r, "enumerate RHS", PASS, {"order": RHS.order, "cap": ctx.cap})]
    rng = _rng(ctx, "theorem1", r)
    g = sample_gu(sp, fj, rng, samples, blocks=gu2_blocks(sp, fj))
    e = _fu_words(sp, fu_generators(sp, fi), rng, samples)
    c = sp.commutator(e, g)
    member = RHS.contains(c)
    bad = np.flatnonzero(~member)
    out.append(Record("theorem1", r, "sampled [FU(I), GU(J)] in RHS", FAIL if bad.size else PASS,
                      {"samples": samples, "failures": int(bad.size)},
                      [f"eps={_fmt(sp, e[k])} g={_fmt(sp, g[k])}" for k in bad[:3]]))
    prod = symmetrized_product(fi, fj)
    low = fu_generators(sp, prod)
    ok = subgroup_leq(low, RHS)
    out.append(Record("theorem1", r, "lower bound FU(symmetrised product) in RHS", PASS if ok else FAIL,
                      {"generators": len(low)}))
    return out


def suite_levels(cfg, ctx):
    r, sp, eng, fi, fj, amb, RHS = _prod_setup(cfg, ctx)
    lev = level_of(sp, RHS)
    fr = sp.fr
    K = ideal_product(fi.I, fj.I)
    upper_gamma = gamma_max(fr, K)
    prod = symmetrized_product(fi, fj)
    ring = fr.ring
    counts = {"level_I": [ring.label(x) for x in lev.I.elements],
              "level_Gamma": [ring.label(x) for x in lev.Gamma.elements],
              "IJ+JI": [ring.label(x) for x in K.elements],
              "product_Gamma": [ring.label(x) for x in prod.Gamma.elements]}
    out = [Record("levels", r, "ideal part in IJ+JI", PASS if lev.I <= K else FAIL, counts),
           Record("levels", r, "parameter part in Gamma_max(IJ+JI)", PASS if lev.Gamma <= upper_gamma else FAIL),
           Record("levels", r, "parameter part contains symmetrised-product parameter",
                  PASS if prod.Gamma <= lev.Gamma else FAIL)]
    return out


def suite_absolute(cfg, ctx):
    r = cfg.get("ring", "sympl-z4")
    ideal = cfg.get("ideal", "2A")
    n = _int(cfg, "n", 3)
    samples = _int(cfg, "samples", 1000)
    fr = _ring(r)
    sp = UnitarySpace(fr, n)
    eng = Engine(sp, ctx.workers)
    fi = _ideal(r, ideal)
    EU = _cached(ctx, eng, f"{r}-EU-{ideal}", lambda: elementary_subgroup(eng, fi, ctx.cap))
    out = [Record("absolute-formula", f"{r}/{ideal}", "enumerate EU", PASS, {"order": EU.order})]
    rng = _rng(ctx, "absolute", r, ideal)
    full = fr.full()
    g = sample_gu(sp, full, rng, samples, blocks=gu2_blocks(sp, full))
    e = _fu_words(sp, fu_generators(sp, fi), rng, samples)
    c = sp.commutator(g, e)
    bad = np.flatnonzero(~EU.contains(c))
    out.append(Record("absolute-formula", f"{r}/{ideal}", "sampled [GU, FU(I)] in EU(I)",
                      FAIL if bad.size else PASS, {"samples": samples, "failures": int(bad.size)},
                      [f"g={_fmt(sp, g[k])} eps={_fmt(sp, e[k])}" for k in bad[:3]]))
    return out


def suite_comaximal(cfg, ctx):
    r = cfg.get("ring", "sympl-z6")
    n = _int(cfg, "n", 3)
    fr = _ring(r)
    sp = UnitarySpace(fr, n)
    eng = Engine(sp, ctx.workers)
    fi = _ideal(r, cfg.get("I", "2A"))
    fj = _ideal(r, cfg.get("J", "3A"))
    # EU(I) is generated as a group by the z-generators, so they serve as group generators of H
    H = z_generators(sp, fi)
    C = mixed_commutator(eng, H, fu_generators(sp, fj), fu_generators(sp, fr.full()), ctx.cap,
                         check_normal=False)
    return [Record("comaximal", r, "[EU(I), EU(J)] = {e}", PASS if C.order == 1 else FAIL,
                   {"order": C.order, "z_generators": len(H)})]


def suite_calculus(cfg, ctx):
    rings = _list(cfg, "rings", "dyadic-symplectic,gaussian-unitary-t2")
    per_tag = _int(cfg, "instances", 50)
    lmax = _int(cfg, "lmax", 6)
    mmax = _int(cfg, "mmax", 4)
    amax = _int(cfg, "anchor_range", 8)
    out = []
    for r in rings:
        try:
            lfr = catalog.local_form_ring(r)
        except KeyError as exc:
            raise ConfigError(f"unknown localized ring {r!r}") from exc
        space = LocalSpace(lfr, _int(cfg, "n", 3))
        for lemma, tags in (("cong", CONG_TAGS), ("comm", COMM_TAGS)):
            op = conj_decompose if lemma == "cong" else comm_decompose
            for tag in tags:
                rng = _rng(ctx, "calculus", r, lemma, tag)
                bad = []
                levels = []
                for _ in range(per_tag):
                    l = int(rng.integers(0, lmax + 1))
                    m = int(rng.integers(0, mmax + 1))
                    x, y = random_instance(lfr, lemma, tag, l, m, rng)
                    d = op(space, x, y, l)
                    v = verify_decomposition(space, d)
                    if d.achieved_level is not None:
                        levels.append(d.achieved_level - l)
                    if not v:
                        bad.append(serialize_decomposition(d, v))
                out.append(Record("calculus", r, f"{lemma} {tag}", FAIL if bad else PASS,
                                  {"instances": per_tag, "failures": len(bad),
                                   "min_margin": min(levels) if levels else None}, bad[:2]))
    for (lemma, tag) in BOUND_ANCHORS:
        viol = []
        for l in range(amax + 1):
            for m in range(amax + 1):
                need = required_p(lemma, tag, l, m)
                anchor = anchor_bound(lemma, tag, l, m)
                if need > anchor:
                    viol.append(f"l={l} m={m} required_p={need} anchor={anchor}")
        out.append(Record("calculus", "anchors", f"{lemma} {tag}", FAIL if viol else PASS,
                          {"grid": (amax + 1) ** 2, "violations": len(viol)}, viol))
    return out


RUNNERS = {
    "steinberg": suite_steinberg,
    "identities": suite_identities,
    "relations-n2-n3": suite_relations,
    "subgroups": suite_subgroups,
    "theorem1": suite_theorem1,
    "levels": suite_levels,
    "absolute-formula": suite_absolute,
    "comaximal": suite_comaximal,
    "calculus": suite_calculus,
}


def run_suite(name: str, cfg: dict, ctx: Context) -> list[Record]:
    if name not in RUNNERS:
        raise ConfigError(f"unknown suite {name!r}")
    try:
        return RUNNERS[name](cfg, ctx)
    except CapExceeded as exc:
        return [Record(name, cfg.get("ring", cfg.get("rings", "-")), "enumeration", CAP,
                       {"count": exc.count, "cap": exc.cap})]
