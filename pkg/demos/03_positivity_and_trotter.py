# coding: utf-8

# # Positive semigroups and the product formula
#
# For real positive alpha, -H(s) has non-negative off-diagonal entries, so
# exp(-H(s)) should be entrywise positive for s < 1. That is what makes the
# ground state unique. At s = 1 the operator is diagonal and the property
# disappears.

# %%
import cmath
import math

import numpy as np

from adiabatic_diophantine import (
    BasisIndexer, CoherentParams, TrotterConfig, build_H, build_HI, build_HP, displacement_matrix_element,
    parse, semigroup_positivity, to_real_frame, trotter_product,
)
from adiabatic_diophantine.spectral import expm_hermitian

ix = BasisIndexer.uniform(1, 12)
params = CoherentParams([1.0])
HI, HP = build_HI(ix, params), build_HP(ix, parse("x1 + 1"))
for s in (0.0, 0.5, 0.99, 1.0):
    rep = semigroup_positivity(build_H(s, HI, HP), 1.0)
    print(f"s={s:4}: smallest entry {rep.min_real:.3e}, off-diagonal max {rep.offdiag_max_abs:.3e}, positive={rep.positive}")

# %%
# Complex alpha breaks sign-definiteness in the raw basis; a phase rotation of
# each mode restores it without touching the spectrum.
cparams = CoherentParams([cmath.exp(1j * math.pi / 4)])
H = build_H(0.5, build_HI(ix, cparams), HP)
print("raw basis:", semigroup_positivity(H).positive, "| rotated:", semigroup_positivity(to_real_frame(H, ix, cparams)).positive)

# %%
# The product of ladder exponentials converges to the exact semigroup.
ix8 = BasisIndexer.uniform(1, 8)
HI8, HP8 = build_HI(ix8, params), build_HP(ix8, parse("x1 - 2"))
exact = expm_hermitian(build_H(0.5, HI8, HP8))
for M in (1, 2, 4, 8, 16, 32):
    err = np.abs(trotter_product(HP8, ix8, params, TrotterConfig(M, 0.5)) - exact).max()
    print(f"M={M:2d}  max error {err:.4f}")

# %%
# Each ladder factor has a closed form in occupation space.
print([round(displacement_matrix_element(m, 0, 0.3).real, 6) for m in range(5)])
