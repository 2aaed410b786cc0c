# %% [markdown]
# # Sensitivity to static disorder
#
# Each coupling and field is scaled by `1 + delta` with `delta` uniform in
# `(-eps, eps)`.  Draws are keyed by seed, perturbation level and trial
# index, so results are reproducible and independent of thread count.

# %%
import numpy as np

from chainsmith import design_last_k, design_numeric, robustness_sweep
from chainsmith.numeric import w_state

w21 = design_numeric(w_state(21))
a = np.zeros(15)
a[[8, 14]] = 1 / np.sqrt(2)
pair = design_last_k(15, a)[0]

# %%
for name, res in (("W-state, N=21", w21), ("sites 9 and 15, N=15", pair)):
    print(name)
    for r in robustness_sweep(res.chain, res.target, [0.0, 0.001, 0.005, 0.01, 0.02], 10000, seed=0, workers=4):
        print(f"  eps {r.perturbation_fraction:<6} mean {r.mean_fidelity:.5f}  "
              f"best {r.best_fidelity:.5f}  std {r.std_fidelity:.1e}")
