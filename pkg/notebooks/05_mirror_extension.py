# %% [markdown]
# # Releasing from the middle of a longer chain
#
# Mirroring an N-site design about its first site gives a (2N-1)-site chain.
# Starting at the middle site, the evolution stays inside a span that copies
# the original chain, and each output amplitude is shared by a mirror pair.

# %%
import numpy as np

from chainsmith import design_small_r, extend_from_middle, fidelity, predict_extended_target
from chainsmith.mirror import restricted_matrix

res = design_small_r(11, 1 / np.sqrt(5), np.sqrt(2 / 5), np.sqrt(2 / 5), 3)[0]
ext = extend_from_middle(res.chain)
target = predict_extended_target(res.target.amplitudes)
print("extended sites:", ext.n_sites)
print("output sites:", (np.flatnonzero(np.abs(target.amplitudes) > 1e-12) + 1).tolist())
print("1 - fidelity:", 1 - fidelity(ext, target)[0])
print("restriction error:", np.max(np.abs(restricted_matrix(ext, 11) - res.chain.matrix())))

# %% [markdown]
# An unequal split angle moves weight between the two halves.

# %%
ext = extend_from_middle(res.chain, theta=0.3)
target = predict_extended_target(res.target.amplitudes, theta=0.3)
print(np.round(target.amplitudes ** 2, 4))
print("1 - fidelity:", 1 - fidelity(ext, target)[0])
