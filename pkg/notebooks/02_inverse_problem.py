# %% [markdown]
# # Rebuilding a chain from its spectrum and first-site weights
#
# A Jacobi matrix is fixed by its eigenvalues together with the squared
# first components of its eigenvectors.  The Lanczos recurrence recovers it
# (with positive couplings) from those two lists.

# %%
import numpy as np

from chainsmith import ChainSpec, SpectralData, eigensystem, lanczos_reconstruct

rng = np.random.default_rng(1)
chain = ChainSpec(rng.uniform(-1, 1, 12), rng.uniform(0.1, 2, 11))
es = eigensystem(chain)
rebuilt = lanczos_reconstruct(SpectralData(es.eigenvalues, es.first_row_weights))
print("field error:", np.max(np.abs(rebuilt.fields - chain.fields)))
print("coupling error:", np.max(np.abs(rebuilt.couplings - chain.couplings)))

# %% [markdown]
# For a mirror-symmetric chain the weights follow from the spectrum alone,
# which is how reference chains for arbitrary transfer spectra are made.

# %%
from chainsmith import persymmetric_weights

data = persymmetric_weights([6.0, 2, 0, -2, -6])
sym = lanczos_reconstruct(data)
print("weights:", np.round(data.weights, 6))
print("couplings:", np.round(sym.couplings, 6), "(mirror symmetric)")
