# %% [markdown]
# Mixed commutator subgroups over Z/2 x Z/4 and Z/6.

# %%
import numpy as np

from hyperunitary import catalog
from hyperunitary.form import gamma_max, ideal_product, symmetrized_product
from hyperunitary.subgroups import (
    Engine, elementary_subgroup, fu_generators, level_of, mixed_commutator, sample_gu, subgroup_leq, z_generators,
)
from hyperunitary.unitary import UnitarySpace

name = "prod-z2-z4"
sp = UnitarySpace(catalog.form_ring(name), 3)
eng = Engine(sp)
I, J = catalog.form_ideal(name, "I"), catalog.form_ideal(name, "J")
label = sp.ring.label
print("I =", [label(x) for x in I.I.elements], " J =", [label(x) for x in J.I.elements])

# %% [EU(I), EU(J)] as the normal closure of generator commutators
amb = fu_generators(sp, sp.fr.full())
EUI = elementary_subgroup(eng, I)
RHS = mixed_commutator(eng, EUI, fu_generators(sp, J), amb, check_normal=False)
print("|EU(I)| =", EUI.order, " |[EU(I), EU(J)]| =", RHS.order)

# %% commutators with sampled elements of the congruence subgroup GU(J) land inside
rng = np.random.default_rng(0)
g = sample_gu(sp, J, rng, 200)
gens = fu_generators(sp, I)
eps = np.stack([sp.T(t.i, t.j, t.param) for t in (gens[k] for k in rng.integers(len(gens), size=200))])
print("all [eps, g] in RHS:", bool(RHS.contains(sp.commutator(eps, g)).all()))

# %% its level sits between the symmetrised product and (IJ+JI, Gamma_max)
lev = level_of(sp, RHS)
K = ideal_product(I.I, J.I)
print("level I part:", [label(x) for x in lev.I.elements], " IJ+JI:", [label(x) for x in K.elements])
print("Gamma part:", [label(x) for x in lev.Gamma.elements],
      " <= Gamma_max:", lev.Gamma <= gamma_max(sp.fr, K),
      " >= product:", symmetrized_product(I, J).Gamma <= lev.Gamma)
print("FU(product) <= RHS:", subgroup_leq(fu_generators(sp, symmetrized_product(I, J)), RHS))

# %% comaximal ideals over Z/6: the mixed commutator collapses
sp6 = UnitarySpace(catalog.form_ring("sympl-z6"), 3)
C = mixed_commutator(Engine(sp6), z_generators(sp6, catalog.form_ideal("sympl-z6", "2A")),
                     fu_generators(sp6, catalog.form_ideal("sympl-z6", "3A")),
                     fu_generators(sp6, sp6.fr.full()), check_normal=False)
print("|[EU(2A), EU(3A)]| over Z/6 =", C.order)
