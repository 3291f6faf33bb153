# coding: utf-8

# # Spectral flow between the two Hamiltonians
#
# The interpolation H(s) = (1 - s) H_I + s H_P starts from a displaced number
# operator whose ground state is the coherent state and ends on the diagonal
# operator D(n)^2. We watch the lowest levels along s.

# %%
import numpy as np

from adiabatic_diophantine import BasisIndexer, CoherentParams, build_HI, build_HP, parse, spectral_flow
from adiabatic_diophantine.spectral import default_grid, gap_profile

p = parse("x1 - 2")
ix = BasisIndexer.uniform(1, 16)
params = CoherentParams([1.0])
HI, HP = build_HI(ix, params), build_HP(ix, p)
samples = spectral_flow(HI, HP, default_grid())

# %%
for smp in samples[::10] + [samples[-1]]:
    print(f"s={smp.s:5.3f}  E0..E3 = {np.round(smp.eigenvalues[:4], 4)}  gap={smp.gap:.4f}")

# %%
gap, where = gap_profile(samples)
print(f"smallest gap before s=1: {gap:.4f} at s={where:.3f}")
print("degenerate ground state at s=1:", samples[-1].gap == 0, "| ground energy:", samples[-1].eigenvalues[0])

# %%
# With two unknowns the initial spectrum is n1 + n2, so levels start out
# exactly degenerate. Only the ground level is guaranteed to stay isolated.
q = parse("(x1+1)^2 - 2*(x2+1)^2")
ix2 = BasisIndexer.uniform(2, 10)
pair = CoherentParams([1.0, 1.0])
flow2 = spectral_flow(build_HI(ix2, pair), build_HP(ix2, q), default_grid(include_endpoint=False))
print("ground gap min:", min(s.gap for s in flow2))
print("smallest spacing anywhere:", min(s.min_spacing for s in flow2))
