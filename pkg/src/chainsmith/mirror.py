"""Release from the middle: mirror-extending an N-site design to 2N-1 sites.

Site N of the extended chain plays the role of site 1 of the original.
Sites on either side are paired as ``|n'> = cos(theta)|N+1-n> + sin(theta)|N-1+n>``
for n >= 2, and ``|1'> = |N>``.  The extended chain restricted to that span
equals the original chain, so the original evolution carries over with each
amplitude split between the two mirror sites.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidTarget
from .spectral import ChainSpec, TargetState

__all__ = ["extend_from_middle", "predict_extended_target", "paired_basis", "restricted_matrix"]


def _check_theta(theta: float) -> None:
    if not 0 < theta < np.pi / 2:
        raise ValueError("theta must lie strictly between 0 and pi/2")


def extend_from_middle(chain: ChainSpec, theta: float = np.pi / 4) -> ChainSpec:
    """Fields ``B'_n = B_{1+|n-N|}``, couplings ``J'_n = J_{1/2+|n-N+1/2|}``.

    The two couplings touching the middle site are replaced by
    ``J_1 cos(theta)`` (left) and ``J_1 sin(theta)`` (right).
    """
    _check_theta(theta)
    n = chain.n_sites
    if n < 2:
        raise ValueError("need at least two sites to extend")
    idx = np.arange(1, 2 * n)
    fields = chain.fields[np.abs(idx - n)]
    jdx = np.arange(1, 2 * n - 1)
    # 1/2 + |n' - N + 1/2| is an integer for integer n'
    couplings = chain.couplings[(np.abs(2 * jdx - 2 * n + 1) + 1) // 2 - 1].copy()
    couplings[n - 2] = chain.couplings[0] * np.cos(theta)
    couplings[n - 1] = chain.couplings[0] * np.sin(theta)
    return ChainSpec(fields, couplings)


def paired_basis(n_sites: int, theta: float = np.pi / 4) -> np.ndarray:
    """Columns are the vectors ``|n'>`` (length 2N-1) for n = 1..N."""
    _check_theta(theta)
    p = np.zeros((2 * n_sites - 1, n_sites))
    p[n_sites - 1, 0] = 1.0
    for k in range(2, n_sites + 1):
        p[n_sites - k, k - 1] = np.cos(theta)
        p[n_sites + k - 2, k - 1] = np.sin(theta)
    return p


def restricted_matrix(extended: ChainSpec, n_sites: int, theta: float = np.pi / 4) -> np.ndarray:
    """``<m'|H'|n'>`` for the paired basis; equals the original matrix."""
    p = paired_basis(n_sites, theta)
    return p.T @ extended.matrix() @ p


def predict_extended_target(alpha, theta: float = np.pi / 4, t0: float = np.pi / 2) -> TargetState:
    """Amplitudes produced from the middle of the extended chain.

    ``alpha_1`` lands on the middle site N; ``alpha_n`` for n >= 2 is split as
    ``cos(theta) alpha_n`` at site N+1-n and ``sin(theta) alpha_n`` at N-1+n.
    """
    a = np.asarray(alpha, dtype=float).reshape(-1)
    if abs(a @ a - 1.0) > 1e-12:
        raise InvalidTarget("alpha must have unit norm")
    out = paired_basis(a.size, theta) @ a
    return TargetState(out, input_site=a.size, t0=t0)
