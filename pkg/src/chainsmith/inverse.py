"""Jacobi matrices from spectral data: the Lanczos reconstruction.

Given a spectrum and the squared first components of the eigenvectors, the
three-term recurrence fixes every field and coupling.  The run here keeps a
full re-orthogonalisation against all previous Lanczos vectors, which is cheap
at the chain lengths of interest and keeps the recurrence honest past N ~ 40.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import InvalidSpectrum, InvalidWeights, NumericalBreakdown
from .spectral import ChainSpec

__all__ = [
    "SpectralData",
    "lanczos_reconstruct",
    "lanczos",
    "persymmetric_weights",
    "chain_from_v1",
]


@dataclass(frozen=True, eq=False)
class SpectralData:
    eigenvalues: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        lam = np.array(self.eigenvalues, dtype=float).reshape(-1)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if lam.shape != w.shape or lam.size == 0:
            raise InvalidSpectrum("eigenvalues and weights must be non-empty and equally long")
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(w))):
            raise InvalidSpectrum("spectral data must be finite")
        if np.any(np.diff(lam) >= 0):
            raise InvalidSpectrum("eigenvalues must be strictly decreasing")
        if np.any(w <= 0):
            raise InvalidWeights(f"weights must be positive, min is {w.min():.3e}")
        if abs(w.sum() - 1.0) > 1e-12:
            raise InvalidWeights(f"weights must sum to 1, got {w.sum():.15g}")
        lam.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "weights", w)

    @property
    def n_sites(self) -> int:
        return int(self.eigenvalues.size)


def lanczos(eigenvalues, weights, tol: Tolerances = DEFAULT):
    """Run the recurrence and return ``(fields, couplings, Q)``.

    ``Q[k, m]`` is the component of eigenvector k on site m+1, i.e. the
    eigenvector matrix of the reconstructed chain with rows and columns
    swapped relative to :class:`~chainsmith.spectral.EigenSystem`.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    w = np.asarray(weights, dtype=float)
    n = lam.size
    b = np.zeros(n)
    j = np.zeros(max(n - 1, 0))
    q_all = np.zeros((n, n))
    q_all[:, 0] = np.sqrt(w)
    floor = tol.breakdown * float(np.max(lam**2)) if n > 1 else 0.0
    for m in range(n):
        q = q_all[:, m]
        b[m] = q @ (lam * q)
        if m == n - 1:
            break
        r = (lam - b[m]) * q
        if m > 0:
            r -= j[m - 1] * q_all[:, m - 1]
        basis = q_all[:, : m + 1]
        for _ in range(2):
            r -= basis @ (basis.T @ r)
        j2 = r @ r
        if not j2 > floor:
            raise NumericalBreakdown(
                f"coupling J_{m + 1}^2 = {j2:.3e} at or below breakdown floor {floor:.3e}"
            )
        j[m] = np.sqrt(j2)
        q_all[:, m + 1] = r / j[m]
    return b, j, q_all


def lanczos_reconstruct(data: SpectralData, tol: Tolerances = DEFAULT) -> ChainSpec:
    """Chain with spectrum ``data.eigenvalues`` and first-site weights ``data.weights``; J > 0."""
    b, j, _ = lanczos(data.eigenvalues, data.weights, tol)
    return ChainSpec(b, j)


def persymmetric_weights(eigenvalues) -> SpectralData:
    """First-site weights of the mirror-symmetric chain with the given spectrum.

    ``w_n`` is proportional to ``1/|p'(lambda_n)|`` where ``p`` is the
    characteristic polynomial; products are accumulated as sums of logs.
    """
    lam = np.asarray(eigenvalues, dtype=float).reshape(-1)
    if np.any(np.diff(lam) >= 0):
        raise InvalidSpectrum("eigenvalues must be strictly decreasing")
    diff = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(diff, 1.0)
    logw = -np.sum(np.log(diff), axis=1)
    w = np.exp(logw - logw.max())
    return SpectralData(lam, w / w.sum())


def chain_from_v1(v1, eigenvalues, tol: Tolerances = DEFAULT) -> ChainSpec:
    """Chain whose first-site weights are the entries of ``|v_1>``.

    Entries must be positive; a sum off by more than 1e-8 is rejected, smaller
    drift is renormalised away.
    """
    w = np.asarray(v1, dtype=float).reshape(-1)
    if np.any(~np.isfinite(w)) or np.any(w <= tol.weight_floor):
        bad = int(np.argmin(w))
        raise InvalidWeights(f"v1 entry {bad + 1} is {w[bad]:.3e}; weights must be positive")
    if abs(w.sum() - 1.0) > 1e-8:
        raise InvalidWeights(f"v1 must sum to 1, got {w.sum():.15g}")
    return lanczos_reconstruct(SpectralData(eigenvalues, w / w.sum()), tol)
