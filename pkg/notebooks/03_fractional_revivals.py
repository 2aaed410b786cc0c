# %% [markdown]
# # Fractional revivals
#
# The designers in this notebook keep the reference spectrum and change only
# the first-site weights, so the evolution time is unchanged while the
# output spreads over a chosen set of sites.

# %%
import numpy as np

from chainsmith import PstSpectrum, design_end_pair, design_last_k, design_triple

r2 = 1 / np.sqrt(2)

# %% [markdown]
# ## Splitting between the two ends
#
# A single parameter `alpha` sets how much amplitude stays at site 1.

# %%
res = design_end_pair(9, 0.6)
print("fields:", np.round(res.chain.fields, 5))
print("couplings:", np.round(res.chain.couplings, 5))
print("1 - fidelity:", res.infidelity)

# %% [markdown]
# ## Five sites, output on the last two
#
# The normalisation condition has two real roots for `beta_2` and only the
# one giving positive weights survives.  Both signs of that root give a
# chain, related by flipping every field.

# %%
results = design_triple(5, 0.0, r2, r2, spectrum=PstSpectrum(np.array([2, 1, 0, -1, -2])))
for r in results:
    print("fields", np.round(r.chain.fields, 6), " couplings", np.round(r.chain.couplings, 6))
print("product of |J|:", np.prod(np.abs(results[0].chain.couplings)), "vs 12 sqrt 2 =", 12 * np.sqrt(2))

# %% [markdown]
# ## Larger supports
#
# An equal superposition on sites 9 and 15 of a 15-site chain only involves
# odd-indexed modes, so the fields vanish and three parameters remain.

# %%
a = np.zeros(15)
a[[8, 14]] = r2
(res,) = design_last_k(15, a)[:1]
print("free beta entries:", res.diagnostics["free"])
print("max |field|:", np.max(np.abs(res.chain.fields)))
print("1 - fidelity:", res.infidelity)

# %%
a = np.zeros(21)
a[[18, 19, 20]] = 1 / np.sqrt(3)
for r in design_last_k(21, a):
    print(f"J_max = {r.j_max:.4f}, 1 - fidelity = {r.infidelity:.1e}")
