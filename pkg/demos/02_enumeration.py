# %% [markdown]
# Enumerating elementary and congruence subgroups exactly.

# %%
import time

from hyperunitary import catalog
from hyperunitary.subgroups import (
    Engine, elementary_subgroup, fu_generators, generate, gu_congruence_subgroup, level_of, subgroup_equal,
    z_generators,
)
from hyperunitary.unitary import UnitarySpace

# %% Sp(6, Z/2) from its 30 elementary generators
sp2 = UnitarySpace(catalog.form_ring("sympl-z2"), 3)
eng2 = Engine(sp2)
t0 = time.perf_counter()
G = generate(eng2, fu_generators(sp2, sp2.fr.full()))
print("|EU(6, Z/2)| =", G.order, f"({time.perf_counter() - t0:.1f}s)")
print("2^9 * 3 * 15 * 63 =", 2 ** 9 * 3 * 15 * 63)

# %% over Z/4 the level 2A subgroups are abelian (2A squares to zero), so they enumerate additively
sp = UnitarySpace(catalog.form_ring("sympl-z4"), 3)
eng = Engine(sp)
two = catalog.form_ideal("sympl-z4", "2A")
two_min = catalog.form_ideal("sympl-z4", "2A-min")
EU = elementary_subgroup(eng, two)
GU = gu_congruence_subgroup(eng, two)
small = elementary_subgroup(eng, two_min)
print("|EU(2A, Gamma_max)| =", EU.order, " |GU(2A, Gamma_max)| =", GU.order, " equal:", subgroup_equal(EU, GU))
print("|EU(2A, Gamma_min)| =", small.order)

# %% the conjugated generators Z_ij(xi, zeta) generate EU as a group
Z = generate(eng, z_generators(sp, two))
print("<Z> == EU:", subgroup_equal(Z, EU))

lev = level_of(sp, small)
print("level of EU(2A, Gamma_min): I =", lev.I.elements, " Gamma =", lev.Gamma.elements)
