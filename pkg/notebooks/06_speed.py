# %% [markdown]
# # How fast can a design be?
#
# The product of couplings is fixed by the reference chain and the end
# amplitude, so the largest coupling is at least their geometric mean.
# That gives a lower bound on `J_max t0` for any design on a given spectrum.

# %%
from chainsmith import design_numeric, gate_model_simulation, gate_model_time, speed_report
from chainsmith.analysis import PUBLISHED_GATE_TIME_N21, asymptotic_bound, linear_w_state_bound
from chainsmith.numeric import w_state

res = design_numeric(w_state(21))
rep = speed_report(res.chain, res.target, res.reference)
for key, value in rep.to_dict().items():
    print(f"{key:24s} {value:.6g}")

# %%
for n in (21, 41):
    print(f"N = {n}: bound {linear_w_state_bound(n):.3f}, large-N form {asymptotic_bound(n):.3f}")

# %% [markdown]
# A sequence of two-site swaps that leaves `1/sqrt(N)` behind at each step
# also builds the W-state.  Its total cost is a sum of arccosines, which a
# direct simulation of each swap reproduces.  The value quoted in the
# literature for N = 21 is printed for comparison.

# %%
print("arccos sum:", gate_model_time(21))
print("simulated: ", gate_model_simulation(21))
print("quoted:    ", PUBLISHED_GATE_TIME_N21)
