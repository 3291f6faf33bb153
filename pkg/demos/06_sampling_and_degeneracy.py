# coding: utf-8

# # Finite sampling and tied minima
#
# In practice probabilities are estimated from repeated measurements. The
# Chebyshev bound gives a repetition count L with L > 1/(4 eps^2 delta).

# %%
import numpy as np

from adiabatic_diophantine import BasisIndexer, ProblemConfig, degeneracy_guard, parse, plan_repetitions, simulate_measurements

plan = plan_repetitions(0.1, 0.05)
print("L =", plan.repetitions)

ix = BasisIndexer.uniform(1, 1)
psi = np.sqrt([0.75, 0.25]).astype(complex)
errors = [abs(float(simulate_measurements(psi, ix, plan, seed=k).frequencies.get((0,), 0)) - 0.75) for k in range(1000)]
print("trials off by more than 0.1:", sum(e > 0.1 for e in errors), "of 1000; worst error", round(max(errors), 4))

# %%
# When D has several zeros in the box, H_P has a degenerate ground level.
# A small term gamma (a^dagger + a) on one mode splits it; the guard reruns
# the procedure for a few gamma values and reports the witnesses.
rep = degeneracy_guard(parse("x1 - x2"), ProblemConfig(cutoff=6, coherent_tol=1e-3), gammas=(0.1, 0.05))
print("tied minimizers:", rep.minimizers)
for g, v in rep.verdicts.items():
    print(f"gamma={g}: {v.decision}, witness={v.witness}, P={v.probability:.3f}")
