# coding: utf-8

# # Running the decision procedure
#
# Starting from the coherent state, the system is evolved under H(t/T) for
# growing T until one occupation tuple carries more than half of the
# probability. That tuple is the ground state of H_P; whether D vanishes
# there settles the question inside the box.

# %%
from adiabatic_diophantine import ProblemConfig, decide, parse, search_box

for source, cutoff in [("x1 - 2", 16), ("x1 + 1", 16), ("x1 - 1", 12)]:
    v = decide(parse(source), ProblemConfig(cutoff=cutoff))
    print(f"{source:8s} -> {v.decision:16s} tuple={v.dominant} P={v.probability:.4f} T={v.T:g}"
          f" | oracle: {search_box(parse(source), cutoff)}")

# %%
# The history shows the dominant tuple for each T that was tried.
v = decide(parse("x1 - 2"))
for h in v.diagnostics["history"]:
    print(f"T={h['T']:4g}  steps={h['steps']}  dominant={h['dominant']}  P={h['extrapolated']:.4f}")
print("truncation check:", v.diagnostics["truncation"])

# %%
# Running out of time budget is reported, not guessed.
short = decide(parse("x1 - 2"), ProblemConfig(t0=0.05, doublings=2))
print(short.decision, "-", short.diagnostics["reason"])
