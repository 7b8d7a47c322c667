# %% [markdown]
# Form rings, hyperbolic forms and elementary transvections over Z/4.

# %%
import numpy as np

from hyperunitary import catalog
from hyperunitary.form import lambda_max, lambda_min
from hyperunitary.unitary import UnitarySpace, relation_sides, steinberg_exhaustive

fr = catalog.form_ring("sympl-z4")
ring = fr.ring
print("carrier:", [ring.label(x) for x in ring.carrier])
print("lambda =", ring.label(fr.lam))
print("Lambda_min =", lambda_min(ring, fr.lam).elements, " Lambda_max =", lambda_max(ring, fr.lam).elements)

# %% basis vectors are ordered e_1..e_n, e_-n..e_-1
sp = UnitarySpace(fr, 3)
e = np.eye(6, dtype=np.int64)
print("h(e_1, e_-1) =", sp.form_h(e[sp.pos(1)], e[sp.pos(-1)]))
print("h(e_-1, e_1) =", sp.form_h(e[sp.pos(-1)], e[sp.pos(1)]))

# %% a short root element carries a compensating entry, a long root element does not
print(sp.T(1, -2, 1))
print(sp.T(1, -1, 2))
print("unitary:", sp.is_unitary(sp.T(1, -2, 1)), sp.is_unitary(sp.T(1, -1, 2)))

bad = sp.identity.copy()
bad[0, 1] = 1  # e + e_12 with no compensating term
print("e + e_12 unitary?", sp.is_unitary(bad))

# %% Steinberg relations, every admissible instance
for rel in ["R1", "R2", "R3", "R4", "R5", "R6"]:
    count, failures = steinberg_exhaustive(sp, rel)
    print(f"{rel}: {count} instances, {len(failures)} failures")

lhs, rhs = relation_sides(sp, "R4", (1, 2, 3), 2, 3)
print("[T12(2), T23(3)] == T13(2):", np.array_equal(lhs, rhs))
