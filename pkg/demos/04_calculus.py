# %% [markdown]
# Certificates for conjugates and commutators of fractional transvections over Z[1/2].

# %%
from hyperunitary import catalog
from hyperunitary.calculus import (
    COMM_TAGS, LocalSpace, LocalTransvection, comm_decompose, conj_decompose, anchor_bound, required_p,
    serialize_decomposition, verify_decomposition,
)

lfr = catalog.local_form_ring("dyadic-symplectic")
R = lfr.R
space = LocalSpace(lfr, 3)

# %% ^{T_13(3/2)} T_-1,3(2^8 * 5): the denominator costs one power of 2
c = LocalTransvection(1, 3, -1, R(3), "A")
x = LocalTransvection(-1, 3, 8, R(5), "J")
d = conj_decompose(space, c, x, l=4)
print(serialize_decomposition(d, verify_decomposition(space, d)))

# %% a commutator of opposite long roots goes through an auxiliary index
a = LocalTransvection(1, -1, 4 * required_p("comm", "IV(2)", 2, 1), R(3) * R(-1), "I")
b = LocalTransvection(-1, 1, -1, R(5), "J")
d = comm_decompose(space, a, b, l=2)
v = verify_decomposition(space, d)
print(d.tag, "q =", d.q, "level", d.achieved_level, "verdict", v.message)

# %% least admissible p per commutator case at l = 3, m = 2
for tag in COMM_TAGS:
    anchor = anchor_bound("comm", tag, 3, 2)
    print(f"{tag:10s} p = {required_p('comm', tag, 3, 2)}" + (f"   anchor bound {anchor}" if anchor else ""))
