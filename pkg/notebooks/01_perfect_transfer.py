# %% [markdown]
# # Perfect state transfer on a reference chain
#
# A chain with couplings `J_n = sqrt(n (N - n))` and zero fields moves an
# excitation from site 1 to site N at `t0 = pi/2` with unit probability.
# Every other design in this package is built relative to such a chain.

# %%
import numpy as np

from chainsmith import PstSpectrum, TargetState, christandl_chain, eigensystem, fidelity
from chainsmith.io import simulate_probabilities

chain = christandl_chain(9)
print("couplings:", np.round(chain.couplings, 4))
print("eigenvalues:", np.round(eigensystem(chain).eigenvalues, 12))

# %% [markdown]
# The spectrum is equally spaced with spacing 2, so the evolution phases at
# `t0 = pi/2` alternate in sign.  That alternation is what mirrors the
# initial state onto the far end.

# %%
target = TargetState(np.eye(9)[-1])
f, phase = fidelity(chain, target)
print(f"transfer fidelity {f:.15f}, global phase {phase:.4f}")

times = np.linspace(0, np.pi / 2, 5)
for t, row in zip(times, simulate_probabilities(chain, times)):
    print(f"t = {t:.3f}  P(site 1) = {row[0]:.4f}  P(site 9) = {row[-1]:.4f}")

# %% [markdown]
# Any strictly decreasing integer list with odd gaps gives a valid transfer
# spectrum.  A non-uniform one still yields a mirror-symmetric chain.

# %%
from chainsmith import pst_chain_from_spectrum

odd = pst_chain_from_spectrum(PstSpectrum(np.array([4, 1, 0, -1, -4])))
print("fields:", np.round(odd.fields, 10))
print("couplings:", np.round(odd.couplings, 6))
print("fidelity:", fidelity(odd, TargetState(np.eye(5)[-1]))[0])
