# %% [markdown]
# # Hexagonal constellations and their neighbor constants
#
# Every closed form in `hexsep` is driven by three numbers per constellation:
# `alpha` (how SNR maps into the Q-function argument), `A` (average number of
# nearest neighbors) and `B` (weight of the pair-overlap correction).  This
# script builds the shapes, counts neighbors and compares `B = 1.3318 A_c`
# against the published coefficients.

# %%
import numpy as np

from hexsep import build_constellation, decision_regions, neighbor_stats
from hexsep.analytic import B_TABLE
from hexsep.lattice import ConstellationKind, points_csv

# %% [markdown]
# ## The small cases by hand
#
# The 4-point rhombus is two equilateral triangles sharing an edge: five
# nearest-neighbor pairs and two triangles, so `A = 2*5/4` and
# `A_c = 3*2/4`.

# %%
rhombus = build_constellation(4, "regular")
print(rhombus)
print(rhombus.points.round(4))
s = neighbor_stats(rhombus)
print(f"A = {s.A}, A_c = {s.A_c}, alpha = {s.alpha:.4f}")

# %%
psk = build_constellation(3, "3psk")
s = neighbor_stats(psk)
print(f"3-PSK: A = {s.A}, A_c = {s.A_c}, alpha = {s.alpha}")

# %% [markdown]
# ## Geometric B against the published table
#
# Shapes of order 64 and above are not unique, so small disagreements there
# point to a different choice of outline rather than a counting error.

# %%
print(f"{'M':>5} {'kind':>9} {'A':>8} {'A_c':>8} {'B geo':>8} {'B pub':>8}")
for (M, kind), published in sorted(B_TABLE.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
    st = neighbor_stats(build_constellation(M, kind))
    b = 1.3318 * float(st.A_c)
    flag = "" if abs(b - published) < 1e-3 else "  <-"
    print(f"{M:>5} {kind.value:>9} {float(st.A):>8.4f} {float(st.A_c):>8.4f} {b:>8.4f} {published:>8.4f}{flag}")

# %% [markdown]
# ## Decision regions
#
# Interior symbols of the 16-point grid own regular hexagons; the symbols on
# the rim own open cells described by two ray directions.

# %%
c16 = build_constellation(16, ConstellationKind.REGULAR)
regions = decision_regions(c16)
bounded = sum(r.bounded for r in regions)
print(f"{bounded} bounded cells, {len(regions) - bounded} open cells")
for r in regions[:3]:
    print(r.symbol_index, len(r.vertices), "vertices,", "bounded" if r.bounded else "open")

# %%
print(points_csv(c16)[:200])
