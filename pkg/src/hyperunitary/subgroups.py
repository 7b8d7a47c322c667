"""Exact enumeration of subgroups of GU(2n, A, Lambda) over small finite rings.

Elements are stored as sorted packed keys (entries of the matrix, a few bits
each).  Two enumeration strategies are used:

* breadth-first closure under left multiplication, with transvections applied
  as sparse row operations;
* an additive fast path when every generator is congruent to ``e`` modulo an
  ideal ``I`` with ``I*I = 0``: then ``(e+X)(e+Y) = e+X+Y`` and the group is
  ``e`` plus the additive span of the generators' ``X``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .form import FormIdeal, form_closure, gamma_min
from .rings import AdditiveSubgroup, Ideal, additive_closure, ideal_closure
from .unitary import Transvection, UnitarySpace, eps, word_inverse

DEFAULT_CAP = 2 ** 22
CHUNK = 1 << 16


class CapExceeded(RuntimeError):
    def __init__(self, count, cap):
        super().__init__(f"enumeration exceeded cap {cap} (reached {count} elements)")
        self.count = count
        self.cap = cap


class NormalityError(RuntimeError):
    pass


# packed keys ---------------------------------------------------------------------------


class KeyCodec:
    """Packs ``(B, N, N)`` handle arrays into fixed-width byte keys and back.

    Entries take 1, 2, 4 or 8 bits and are packed little-endian, row-major by the
    frozen position map.  Keys of at most 8 bytes are plain ``uint64``.
    """

    def __init__(self, space: UnitarySpace):
        order = space.ring.order
        if order > 256:
            raise ValueError("enumeration needs a carrier of at most 256 elements")
        bits = max(1, math.ceil(math.log2(order)))
        self.bits = 1 << math.ceil(math.log2(bits))
        self.per_byte = 8 // self.bits
        self.cells = space.N * space.N
        self.N = space.N
        nbytes = -(-self.cells // self.per_byte)
        self.nbytes = 8 if nbytes <= 8 else nbytes
        self.dtype = np.dtype(np.uint64) if self.nbytes == 8 else np.dtype(f"V{self.nbytes}")
        self.mask = np.uint8((1 << self.bits) - 1)

    def encode(self, mats) -> np.ndarray:
        flat = np.asarray(mats, dtype=np.uint8).reshape(-1, self.cells)
        pad = self.nbytes * self.per_byte - self.cells
        if pad:
            flat = np.concatenate([flat, np.zeros((flat.shape[0], pad), dtype=np.uint8)], axis=1)
        x = flat.reshape(-1, self.nbytes, self.per_byte)
        out = x[..., 0].copy()
        for k in range(1, self.per_byte):
            out |= x[..., k] << np.uint8(self.bits * k)
        return np.ascontiguousarray(out).view(self.dtype).ravel()

    def decode(self, keys) -> np.ndarray:
        raw = np.ascontiguousarray(keys).view(np.uint8).reshape(-1, self.nbytes)
        parts = [(raw >> np.uint8(self.bits * k)) & self.mask for k in range(self.per_byte)]
        vals = np.stack(parts, axis=-1).reshape(raw.shape[0], -1)
        return np.ascontiguousarray(vals[:, : self.cells]).reshape(-1, self.N, self.N)


def _member(sorted_keys, keys):
    if sorted_keys.size == 0:
        return np.zeros(len(keys), dtype=bool)
    idx = np.searchsorted(sorted_keys, keys)
    idx[idx == sorted_keys.size] = 0
    return sorted_keys[idx] == keys


# sparse operators ----------------------------------------------------------------------


class _Tables:
    def __init__(self, ring):
        if not ring.tabulated:
            raise ValueError("enumeration needs a tabulated ring")
        self.add = ring.add_table.astype(np.uint8)
        self.mul = ring.mul_table.astype(np.uint8)
        self.neg = ring.neg_table.astype(np.uint8)
        self.conj = ring.conj_table.astype(np.uint8)


def _row_ops(space: UnitarySpace, t: Transvection):
    """``(target, coeff, source)`` triples with ``T g`` = ``g`` plus ``coeff * row(source)`` on ``row(target)``."""
    ring = space.ring
    ops = [(space.pos(t.i), int(t.param), space.pos(t.j))]
    if not t.is_long:
        c = int(ring.neg(ring.mul(space.sign_factor(t.i, t.j), ring.conj(t.param))))
        ops.append((space.pos(-t.j), c, space.pos(-t.i)))
    return [op for op in ops if op[1] != 0]


@dataclass
class Generator:
    """A group element with a fast left action when it is a transvection word."""

    matrix: np.ndarray
    letters: tuple = ()
    label: str = ""

    @property
    def sparse(self):
        return bool(self.letters)


class Engine:
    """Left/right actions and key coding shared by all enumerations in one space."""

    def __init__(self, space: UnitarySpace, workers: int = 1):
        self.space = space
        self.codec = KeyCodec(space)
        self.tab = _Tables(space.ring)
        self.workers = max(1, int(workers))
        self.identity = space.identity.astype(np.uint8)

    # generators ---------------------------------------------------------------------

    def make_generator(self, g) -> Generator:
        sp = self.space
        if isinstance(g, Generator):
            return g
        if isinstance(g, Transvection):
            sp.check_transvection(g)
            return Generator(sp.transvection_matrix(g).astype(np.uint8), ((g, 1),), str(g))
        if isinstance(g, tuple) and all(isinstance(x, tuple) and isinstance(x[0], Transvection) for x in g):
            letters = tuple((t, int(e)) for t, e in g)
            for t, _ in letters:
                sp.check_transvection(t)
            return Generator(sp.word_matrix(letters).astype(np.uint8), letters,
                             "".join(f"{t}^{e}" if e < 0 else str(t) for t, e in letters))
        m = np.asarray(g)
        if m.shape != (sp.N, sp.N):
            raise ValueError("generator has the wrong shape")
        if not bool(sp.is_unitary_fast(m.astype(np.int64))):
            raise ValueError("generator is not unitary")
        return Generator(m.astype(np.uint8), (), "matrix")

    def inverse_generator(self, g: Generator) -> Generator:
        sp = self.space
        if g.letters:
            inv = tuple((sp.inverse_letter(t), 1) if e > 0 else (t, 1) for t, e in reversed(g.letters))
            return Generator(sp.inverse(g.matrix.astype(np.int64)).astype(np.uint8), inv, g.label + "^-1")
        return Generator(sp.inverse(g.matrix.astype(np.int64)).astype(np.uint8), (), g.label + "^-1")

    # actions -----------------------------------------------------------------------------

    def _left_letter(self, mats, t: Transvection):
        out = mats.copy()
        for tr, c, src in _row_ops(self.space, t):
            out[:, tr, :] = self.tab.add[mats[:, tr, :], self.tab.mul[c, mats[:, src, :]]]
        return out

    def _right_letter(self, mats, t: Transvection):
        # g T: column j += column i * xi, and column -i += column -j * c
        sp = self.space
        out = mats.copy()
        for tr, c, src in _row_ops(sp, t):
            out[:, :, src] = self.tab.add[mats[:, :, src], self.tab.mul[mats[:, :, tr], c]]
        return out

    def left(self, g: Generator, mats):
        """``g * m`` for a batch of uint8 matrices."""
        if g.letters:
            out = mats
            for t, e in reversed(g.letters):
                out = self._left_letter(out, t if e > 0 else self.space.inverse_letter(t))
            return out
        return self._generic(g.matrix[None], mats)

    def right(self, mats, g: Generator):
        """``m * g`` for a batch of uint8 matrices."""
        if g.letters:
            out = mats
            for t, e in g.letters:
                out = self._right_letter(out, t if e > 0 else self.space.inverse_letter(t))
            return out
        return self._generic(mats, g.matrix[None])

    def _generic(self, a, b):
        tab = self.tab
        prods = tab.mul[a[..., :, :, None], b[..., None, :, :]]
        out = prods[..., 0, :]
        for k in range(1, self.space.N):
            out = tab.add[out, prods[..., k, :]]
        return out

    def conjugate(self, c: Generator, mats, c_inv: Generator | None = None):
        """``c m c^-1`` for a batch."""
        c_inv = self.inverse_generator(c) if c_inv is None else c_inv
        return self.right(self.left(c, mats), c_inv)

    def map_chunks(self, fn, mats):
        """Apply ``fn`` chunkwise; chunks may run on worker threads, output order is fixed."""
        chunks = [mats[k:k + CHUNK] for k in range(0, len(mats), CHUNK)] or [mats]
        if self.workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(self.workers) as ex:
                parts = list(ex.map(fn, chunks))
        else:
            parts = [fn(c) for c in chunks]
        return np.concatenate(parts) if parts else mats

    def encode(self, mats):
        return self.codec.encode(mats)

    def decode(self, keys):
        return self.codec.decode(keys)


# subgroups -------------------------------------------------------------------------------


@dataclass(eq=False)
class GeneratedSubgroup:
    """An enumerated subgroup: sorted packed keys plus the group generators that built it."""

    engine: Engine
    keys: np.ndarray
    generators: list = field(default_factory=list)
    name: str = ""
    normal_under: str = ""
    additive_ideal: Ideal | None = None

    @property
    def space(self) -> UnitarySpace:
        return self.engine.space

    @property
    def order(self) -> int:
        return int(self.keys.size)

    def __len__(self):
        return self.order

    def contains(self, mats) -> np.ndarray:
        mats = np.asarray(mats).astype(np.uint8)
        if mats.ndim == 2:
            mats = mats[None]
        return _member(self.keys, self.engine.encode(mats))

    def __contains__(self, g) -> bool:
        return bool(self.contains(g)[0])

    def elements(self, chunk: int = CHUNK):
        for k in range(0, self.keys.size, chunk):
            yield self.engine.decode(self.keys[k:k + chunk])

    def matrices(self) -> np.ndarray:
        return self.engine.decode(self.keys)

    def __repr__(self):
        return f"GeneratedSubgroup({self.name or 'unnamed'}, order={self.order})"


def trivial_subgroup(engine: Engine) -> GeneratedSubgroup:
    return GeneratedSubgroup(engine, engine.encode(engine.identity[None]), [], "trivial")


def _entry_ideal(space, mats) -> Ideal:
    ring = space.ring
    diff = ring.sub(np.asarray(mats, dtype=np.int64), space.identity)
    return ideal_closure(ring, np.unique(diff), involution_invariant=False)


def _square_zero(ideal: Ideal) -> bool:
    x = ideal.elements
    ring = ideal.ring
    return bool(np.all(ring.mul(x[:, None], x[None, :]) == 0))


def _span_extend(group: GeneratedSubgroup, g: Generator, cap: int) -> GeneratedSubgroup:
    """Add ``g`` to an additive-mode group: new elements are ``S + k X``."""
    eng = group.engine
    tab = eng.tab
    X = tab.add[g.matrix, tab.neg[eng.identity]]
    known = group.keys
    S = eng.decode(known)
    Sx = tab.add[S, tab.neg[eng.identity][None]]
    blocks = [known]
    cur = X
    while not _member(known, eng.encode(tab.add[cur, eng.identity][None]))[0]:
        blocks.append(eng.encode(tab.add[tab.add[Sx, cur[None]], eng.identity[None]]))
        cur = tab.add[cur, X]
        if sum(b.size for b in blocks) > cap:
            raise CapExceeded(sum(b.size for b in blocks), cap)
    keys = np.sort(np.concatenate(blocks))
    return GeneratedSubgroup(eng, keys, group.generators + [g], group.name, group.normal_under,
                             group.additive_ideal)


def _bfs_extend(group: GeneratedSubgroup, new: Sequence[Generator], cap: int) -> GeneratedSubgroup:
    """Close ``group`` together with new generators under left multiplication."""
    eng = group.engine
    gens = list(group.generators) + list(new)
    known = group.keys
    frontier_gens = list(new)
    frontier = eng.decode(known)
    while frontier.shape[0]:
        found_keys, found_mats = [], []
        for g in frontier_gens:
            prod = eng.map_chunks(lambda m, g=g: eng.left(g, m), frontier)
            keys = eng.encode(prod)
            keep = ~_member(known, keys)
            if keep.any():
                keys, idx = np.unique(keys[keep], return_index=True)
                found_keys.append(keys)
                found_mats.append(prod[keep][idx])
        if not found_keys:
            break
        keys = np.concatenate(found_keys)
        mats = np.concatenate(found_mats)
        keys, idx = np.unique(keys, return_index=True)
        frontier = mats[idx]
        known = np.sort(np.concatenate([known, keys]))
        if known.size > cap:
            raise CapExceeded(int(known.size), cap)
        frontier_gens = gens
    return GeneratedSubgroup(eng, known, gens, group.name, group.normal_under, None)


def extend(group: GeneratedSubgroup, gens: Iterable, cap: int = DEFAULT_CAP) -> GeneratedSubgroup:
    """The subgroup generated by ``group`` and ``gens``."""
    eng = group.engine
    gens = [eng.make_generator(g) for g in gens]
    gens = [g for g in gens if not g.matrix.tobytes() == eng.identity.tobytes()]
    if not gens:
        return group
    if group.additive_ideal is not None or group.order == 1:
        seeds = [np.asarray(eng.identity)] + [g.matrix for g in group.generators] + [g.matrix for g in gens]
        ideal = _entry_ideal(eng.space, np.stack(seeds))
        if group.additive_ideal is not None:
            ideal = ideal_closure(eng.space.ring, np.concatenate([ideal.elements, group.additive_ideal.elements]))
        if _square_zero(ideal):
            out = GeneratedSubgroup(eng, group.keys, list(group.generators), group.name, group.normal_under, ideal)
            for g in gens:
                if not out.contains(g.matrix)[0]:
                    out = _span_extend(out, g, cap)
            return out
    pending = [g for g in gens if not group.contains(g.matrix)[0]]
    if not pending:
        return group
    if group.order > 1 and not group.generators:
        raise ValueError("cannot extend an enumerated subgroup that carries no generators")
    return _bfs_extend(group, pending, cap)


def generate(space_or_engine, gens: Iterable = (), cap: int = DEFAULT_CAP, name: str = "",
             workers: int = 1) -> GeneratedSubgroup:
    """Enumerate the subgroup generated by transvections, transvection words or matrices."""
    eng = space_or_engine if isinstance(space_or_engine, Engine) else Engine(space_or_engine, workers)
    out = extend(trivial_subgroup(eng), gens, cap)
    out.name = name
    return out


def normal_closure(space_or_engine, seeds: Iterable, conjugators: Iterable, cap: int = DEFAULT_CAP,
                   name: str = "", workers: int = 1, start: GeneratedSubgroup | None = None) -> GeneratedSubgroup:
    """Smallest subgroup containing ``seeds`` and normalised by the group of ``conjugators``."""
    eng = space_or_engine if isinstance(space_or_engine, Engine) else Engine(space_or_engine, workers)
    conj = [eng.make_generator(c) for c in conjugators]
    conj_inv = [eng.inverse_generator(c) for c in conj]
    group = trivial_subgroup(eng) if start is None else start
    queue = []
    for s in seeds:
        s = eng.make_generator(s)
        if not group.contains(s.matrix)[0]:
            group = extend(group, [s], cap)
            queue.append(s.matrix)
    queue = [g.matrix for g in group.generators]
    head = 0
    while head < len(queue):
        batch = np.stack(queue[head:head + 256])
        head += batch.shape[0]
        for c, ci in zip(conj, conj_inv):
            images = eng.conjugate(c, batch, ci)
            outside = ~group.contains(images)
            for m in images[outside]:
                if not group.contains(m)[0]:
                    group = extend(group, [Generator(m, (), "conjugate")], cap)
                    queue.append(m)
    group.name = name
    group.normal_under = "conjugators"
    return group


def check_normalised(group: GeneratedSubgroup, conjugators: Iterable, sample: int = 1000, seed: int = 0):
    """Spot-check that conjugating group elements stays inside; returns a witness or ``None``."""
    eng = group.engine
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, group.order, min(sample, group.order))
    mats = eng.decode(group.keys[np.sort(idx)])
    for c in conjugators:
        c = eng.make_generator(c)
        images = eng.conjugate(c, mats)
        bad = ~group.contains(images)
        if bad.any():
            return c.label, images[bad][0]
    return None


def check_closed(group: GeneratedSubgroup, pairs: int = 1000, seed: int = 0) -> bool:
    """Spot-check closure under products and inverses on random pairs."""
    sp = group.space
    rng = np.random.default_rng(seed)
    a = group.engine.decode(group.keys[rng.integers(0, group.order, pairs)]).astype(np.int64)
    b = group.engine.decode(group.keys[rng.integers(0, group.order, pairs)]).astype(np.int64)
    ok = group.contains(sp.matmul(a, b)) & group.contains(sp.inverse(a))
    return bool(ok.all())


# generator families ---------------------------------------------------------------------


def fu_generators(space: UnitarySpace, fi: FormIdeal) -> list[Transvection]:
    """All nontrivial elementary transvections of level ``fi``."""
    out = []
    I = [int(x) for x in fi.I.elements if x != 0]
    for i, j in space.short_roots():
        out.extend(Transvection(i, j, x) for x in I)
    for i, j in space.long_roots():
        out.extend(Transvection(i, j, int(a)) for a in space.long_params(i, fi.Gamma) if a != 0)
    return out


def z_word(space: UnitarySpace, i: int, j: int, xi: int, zeta: int) -> tuple:
    """``Z_ij(xi, zeta) = ^{T_ji(zeta)} T_ij(xi)`` as a transvection word."""
    if xi == 0:
        return ()
    core = (Transvection(i, j, int(xi)), 1)
    if zeta == 0:
        return (core,)
    c = Transvection(j, i, int(zeta))
    return ((c, 1), core, (c, -1))


def z_generators(space: UnitarySpace, fi: FormIdeal) -> list[tuple]:
    """Words ``Z_ij(xi, zeta)`` with ``xi`` of level ``fi`` and ``zeta`` ambient (its root's own parameter set)."""
    if space.n < 3:
        raise ValueError("Z-generators need n >= 3")
    out = []
    A = space.ring.carrier
    I = [int(x) for x in fi.I.elements if x != 0]
    for i, j in space.short_roots():
        for x in I:
            out.extend(z_word(space, i, j, x, int(z)) for z in A)
    for i, j in space.long_roots():
        for x in space.long_params(i, fi.Gamma):
            if x == 0:
                continue
            out.extend(z_word(space, i, j, int(x), int(z)) for z in space.long_params(-i))
    return out


def elementary_subgroup(space_or_engine, fi: FormIdeal, cap: int = DEFAULT_CAP, workers: int = 1,
                        name: str = "EU") -> GeneratedSubgroup:
    """``EU(2n, I, Gamma)``: the normal closure of ``FU(2n, I, Gamma)`` under ``FU(2n, A, Lambda)``."""
    eng = space_or_engine if isinstance(space_or_engine, Engine) else Engine(space_or_engine, workers)
    sp = eng.space
    return normal_closure(eng, fu_generators(sp, fi), fu_generators(sp, sp.fr.full()), cap, name)


# congruence subgroups ---------------------------------------------------------------------


def gu_congruence_subgroup(space_or_engine, fi: FormIdeal, cap: int = DEFAULT_CAP, workers: int = 1,
                           name: str = "GU") -> GeneratedSubgroup:
    """All ``g`` in ``GU(2n, A, Lambda)`` congruent to ``e`` modulo ``(I, Gamma)``, by column search."""
    eng = space_or_engine if isinstance(space_or_engine, Engine) else Engine(space_or_engine, workers)
    sp = eng.space
    ring = sp.ring
    n, N = sp.n, sp.N
    bound = fi.I.size ** (n * (2 * n + 1))
    if bound > cap:
        raise CapExceeded(bound, cap)
    if fi.I.size ** N > 1 << 22:
        raise CapExceeded(fi.I.size ** N, 1 << 22)
    order = []
    for k in range(1, n + 1):
        order += [sp.pos(k), sp.pos(-k)]
    # w ranges over I^N
    grids = np.meshgrid(*([fi.I.elements] * N), indexing="ij")
    W = np.stack([g.ravel() for g in grids], axis=1)
    lam = sp.fr.lam
    use_float = ring.descriptor.startswith("zmod:")
    partial = np.zeros((1, 0, N), dtype=np.int64)
    for step, a in enumerate(order):
        cand = ring.add(W, sp.identity[a][None, :])
        cand = cand[fi.Gamma.mask[sp.form_f(cand, cand)]]
        if step == 0:
            partial = cand[:, None, :]
            continue
        # h(u_b, v) = sum_p L[p] v_p
        L = np.zeros_like(partial)
        L[..., sp.minus] = ring.conj(partial[..., sp.plus])
        L[..., sp.plus] = ring.mul(lam, ring.conj(partial[..., sp.minus]))
        target = sp.gram_h[order[:step], a]
        pieces = []
        step_rows = 2048 if use_float else max(1, (1 << 21) // (cand.shape[0] * N * step))
        for s in range(0, partial.shape[0], step_rows):
            Lc = L[s:s + step_rows]
            if use_float:
                m = ring.order
                vals = np.rint(np.matmul(Lc.astype(np.float64), cand.T.astype(np.float64))).astype(np.int64) % m
            else:
                prods = ring.mul(Lc[:, :, None, :], cand[None, None, :, :])
                vals = prods[..., 0]
                for p in range(1, N):
                    vals = ring.add(vals, prods[..., p])
            ok = np.all(vals == target[None, :, None], axis=1)
            pi, ci = np.nonzero(ok)
            pieces.append(np.concatenate([partial[s:s + step_rows][pi], cand[ci][:, None, :]], axis=1))
        partial = np.concatenate(pieces) if pieces else np.zeros((0, step + 1, N), dtype=np.int64)
        if partial.shape[0] > cap:
            raise CapExceeded(partial.shape[0], cap)
    mats = np.zeros((partial.shape[0], N, N), dtype=np.uint8)
    for step, a in enumerate(order):
        mats[:, :, a] = partial[:, step, :]
    keys = np.sort(eng.encode(mats))
    ideal = fi.I if _square_zero(fi.I) else None
    return GeneratedSubgroup(eng, keys, [], name, "enumerated", ideal)


# commutators, levels, full congruence ----------------------------------------------------------


def commutator_batch(eng: Engine, a, b):
    sp = eng.space
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    return sp.commutator(a, b).astype(np.uint8)


def mixed_commutator(space_or_engine, H, K, conjugators: Iterable, cap: int = DEFAULT_CAP,
                     check_normal: bool = True, name: str = "[H,K]", workers: int = 1) -> GeneratedSubgroup:
    """``[H, K]`` for normal ``H``, ``K``.

    ``H`` must be given by group generators (a ``GeneratedSubgroup`` or a list);
    ``K`` may be given by normal-closure seeds.  Then ``[H, K]`` is the normal closure
    of the generator commutators.
    """
    eng = space_or_engine if isinstance(space_or_engine, Engine) else Engine(space_or_engine, workers)
    conjugators = [eng.make_generator(c) for c in conjugators]
    if check_normal:
        for grp in (H, K):
            if isinstance(grp, GeneratedSubgroup):
                w = check_normalised(grp, conjugators, sample=200)
                if w is not None:
                    raise NormalityError(f"{grp.name} is not normalised by {w[0]}")
    hg = H.generators if isinstance(H, GeneratedSubgroup) else [eng.make_generator(h) for h in H]
    kg = K.generators if isinstance(K, GeneratedSubgroup) else [eng.make_generator(k) for k in K]
    hg = [eng.make_generator(h) for h in hg]
    kg = [eng.make_generator(k) for k in kg]
    if not hg or not kg:
        out = trivial_subgroup(eng)
        out.name = name
        return out
    hm = np.stack([h.matrix for h in hg])
    seeds = []
    for k in kg:
        c = commutator_batch(eng, hm, np.broadcast_to(k.matrix, hm.shape))
        seeds.append(c)
    seeds = np.concatenate(seeds)
    keys, idx = np.unique(eng.encode(seeds), return_index=True)
    seeds = seeds[np.sort(idx)]
    return normal_closure(eng, [Generator(s, (), "commutator") for s in seeds], conjugators, cap, name)


def level_of(space: UnitarySpace, S) -> FormIdeal:
    """Smallest form ideal ``(I, Gamma)`` whose congruence subgroup contains every element of ``S``."""
    ring = space.ring
    entries, defects = set(), set()
    chunks = S.elements() if isinstance(S, GeneratedSubgroup) else [np.asarray(S)]
    for mats in chunks:
        mats = np.asarray(mats, dtype=np.int64).reshape(-1, space.N, space.N)
        diff = ring.sub(mats, space.identity)
        entries.update(np.unique(diff).tolist())
        defects.update(np.unique(space.basis_defects(mats)).tolist())
    I = ideal_closure(ring, sorted(entries), involution_invariant=True)
    G = additive_closure(ring, list(gamma_min(space.fr, I).elements) + sorted(defects))
    G = form_closure(ring, G.elements)
    return FormIdeal(space.fr, I, G)


def subgroup_leq(H, K: GeneratedSubgroup) -> bool:
    if isinstance(H, GeneratedSubgroup):
        return bool(np.all(_member(K.keys, H.keys)))
    eng = K.engine
    gens = [eng.make_generator(h) for h in H]
    if not gens:
        return True
    return bool(K.contains(np.stack([g.matrix for g in gens])).all())


def subgroup_equal(H: GeneratedSubgroup, K: GeneratedSubgroup) -> bool:
    return H.order == K.order and bool(np.array_equal(H.keys, K.keys))


def cu_necessary_check(space: UnitarySpace, g, fi: FormIdeal, probes: Iterable) -> bool:
    """``[g, p]`` lies in ``GU(2n, I, Gamma)`` for every probe ``p``."""
    g = np.asarray(g, dtype=np.int64)
    for p in probes:
        if isinstance(p, Transvection):
            p = space.transvection_matrix(p)
        c = space.commutator(g, np.asarray(p, dtype=np.int64))
        if not bool(space.congruence_fast(c, fi)):
            return False
    return True


def cu_filter(group: GeneratedSubgroup, fi: FormIdeal, probes: Iterable[Transvection]) -> np.ndarray:
    """Keys of elements ``g`` of ``group`` with ``[g, p]`` in ``GU(I, Gamma)`` for all probes.

    With probes generating the ambient group this is the exact full congruence
    subgroup inside ``group``, since ``[g, xy] = [g, x] ^x[g, y]`` and ``GU(I, Gamma)``
    is normal.
    """
    eng = group.engine
    sp = eng.space
    tab = eng.tab
    probes = [eng.make_generator(p) for p in probes]
    kept = []
    for mats in group.elements():
        ok = np.ones(mats.shape[0], dtype=bool)
        for p in probes:
            # gp - pg has entries in I iff [g, p] = gp (pg)^-1 is congruent to e modulo I
            d = tab.add[eng.right(mats, p), tab.neg[eng.left(p, mats)]]
            ok &= np.all(fi.I.mask[d], axis=(1, 2))
        cand = mats[ok]
        if cand.size:
            ok2 = np.ones(cand.shape[0], dtype=bool)
            for p in probes:
                c = sp.commutator(cand.astype(np.int64), p.matrix.astype(np.int64))
                ok2 &= sp.congruence_fast(c, fi)
            kept.append(eng.encode(cand[ok2]))
    return np.sort(np.concatenate(kept)) if kept else np.zeros(0, dtype=eng.codec.dtype)


# sampling of GU(2n, J, Delta) ------------------------------------------------------------------


def gu2_blocks(space: UnitarySpace, fi: FormIdeal) -> np.ndarray:
    """All 2x2 matrices of ``GU(2, A, Lambda)`` congruent to ``e`` modulo ``fi``."""
    from .unitary import UnitarySpace as _US

    small = _US(space.fr, 1)
    ring = space.ring
    one = np.array([[ring.one, 0], [0, ring.one]])
    grids = np.meshgrid(*([fi.I.elements] * 4), indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1).reshape(-1, 2, 2)
    mats = ring.add(X, one[None])
    ok = small.is_unitary_fast(mats, fi.Gamma)
    return mats[ok]


def embed_block(space: UnitarySpace, block, i: int) -> np.ndarray:
    """Quasi-diagonal embedding of a 2x2 block acting on ``e_i, e_-i`` (``i > 0``)."""
    g = space.identity.copy()
    p, q = space.pos(i), space.pos(-i)
    g[p, p], g[p, q], g[q, p], g[q, q] = block[0, 0], block[0, 1], block[1, 0], block[1, 1]
    return g


def sample_gu(space: UnitarySpace, fi: FormIdeal, rng: np.random.Generator, count: int,
              word_length: int = 6, blocks: np.ndarray | None = None) -> np.ndarray:
    """Random elements of ``GU(2n, I, Gamma)``: words in FU(I, Gamma) times embedded GU(2) blocks."""
    gens = fu_generators(space, fi)
    blocks = gu2_blocks(space, fi) if blocks is None else blocks
    out = np.empty((count, space.N, space.N), dtype=np.int64)
    for k in range(count):
        g = space.identity
        for _ in range(word_length):
            if gens:
                g = space.matmul(g, space.transvection_matrix(gens[int(rng.integers(len(gens)))], check=False))
            if len(blocks):
                b = blocks[int(rng.integers(len(blocks)))]
                g = space.matmul(g, embed_block(space, b, int(rng.integers(1, space.n + 1))))
        out[k] = g
    return out


# persistence ------------------------------------------------------------------------------------


def save_cache(path, group: GeneratedSubgroup, header: dict) -> None:
    lines = [f"{k}={v}" for k, v in sorted(header.items())]
    lines += [f"order={group.order}", f"keybytes={group.engine.codec.dtype.itemsize}", ""]
    with open(path, "wb") as fh:
        fh.write("\n".join(lines).encode() + b"\n")
        fh.write(np.ascontiguousarray(group.keys).tobytes())


def load_cache(path, engine: Engine) -> tuple[dict, GeneratedSubgroup]:
    with open(path, "rb") as fh:
        data = fh.read()
    head, _, body = data.partition(b"\n\n")
    header = dict(line.split("=", 1) for line in head.decode().splitlines())
    width = int(header.pop("keybytes"))
    if width != engine.codec.dtype.itemsize:
        raise ValueError("cache key width does not match this space")
    order = int(header.pop("order"))
    keys = np.frombuffer(body, dtype=engine.codec.dtype).copy()
    if keys.size != order:
        raise ValueError("cache file truncated")
    return header, GeneratedSubgroup(engine, keys, [], header.get("name", "cached"), "cached")
