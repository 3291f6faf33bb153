# coding: utf-8

# # Equations and the brute-force oracle
#
# An equation is typed as plain text over unknowns x1, x2, ... and turned into
# an exact integer polynomial. The oracle scans a box of non-negative tuples
# for zeros; every quantum-style verdict later on is checked against it.

# %%
from adiabatic_diophantine import evaluate, parse, search_box

p = parse("(x1+1)^2 - 2*(x2+1)^2")
print(p)
print(p.terms)

# %%
# Evaluation is exact, so huge values do not lose digits.
print(evaluate(p, (0, 0)), evaluate(p, (6, 4)))
print(evaluate(parse("x1^40 - 3^80"), (9,)))

# %%
# The shifted Pell form has no zero with both unknowns >= 0 because
# (x1+1)/(x2+1) would equal sqrt(2).
for source, bound in [("x1 - 2", 5), ("x1 + 1", 50), ("x1*x2 - 6", 10), (str(p), 20)]:
    print(f"{source:28s} bound={bound:3d} -> {search_box(parse(source), bound)}")

# %%
# Malformed input reports where parsing stopped.
try:
    parse("x1 +* 2")
except ValueError as exc:
    print(exc)
