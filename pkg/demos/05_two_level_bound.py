# coding: utf-8

# # The two-level excited-state bound
#
# With one ground and one excited level at each end, the probability of
# finishing in the excited state never exceeds one half as long as the
# overlap |<g(0)|e(T)>|^2 is at most one half. With overlap 3/4 there is a
# range of T where it does.

# %%
import numpy as np

from adiabatic_diophantine import flow_integral, sweep_T
from adiabatic_diophantine.twolevel import FIG1_PRESETS, check_condition

for name, pb in FIG1_PRESETS.items():
    res = sweep_T(pb)
    above = res.T[res.excited > 0.5]
    span = f"{above.min():.3g}..{above.max():.3g}" if len(above) else "none"
    print(f"case {name}: mixing={pb.mixing}, condition={check_condition(pb)}, "
          f"max excited={res.excited.max():.4f}, T above 1/2: {span}, at T=1e3: {res.excited[-1]:.1e}")

# %%
# Along the flow the accumulated eigenbasis angle omega bounds the excited
# weight through sin^2(omega/2).
flow = flow_integral(FIG1_PRESETS["B"], 5.0)
print("rate keeps its sign:", flow.sign_constant)
print("omega(T) =", flow.omega[-1], "(pi/2 =", np.pi / 2, ")")
print("largest excess of excited weight over the bound:", float((flow.excited - flow.bound).max()))
