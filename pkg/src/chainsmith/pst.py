"""Perfect-state-transfer reference chains and their spectra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import InvalidSpectrum
from .inverse import lanczos_reconstruct, persymmetric_weights
from .spectral import ChainSpec

__all__ = [
    "PstSpectrum",
    "christandl_chain",
    "pst_chain_from_spectrum",
    "validate_synthesis_spectrum",
]


@dataclass(frozen=True, eq=False)
class PstSpectrum:
    """Eigenvalues ``pi * (m_n + offset) / t0`` with integer, strictly decreasing ``m_n``.

    Consecutive integers must differ by an odd amount so that the evolution
    phases ``exp(-i lambda_n t0)`` alternate in sign.  ``offset`` is a common
    shift (0 or 1/2 in practice) that lets even-length linear spectra be
    written with integers.
    """

    integers: np.ndarray
    t0: float = np.pi / 2
    offset: float = 0.0

    def __post_init__(self):
        raw = np.asarray(self.integers).reshape(-1)
        m = np.rint(raw).astype(np.int64)
        if raw.size == 0 or not np.all(raw == m):
            raise InvalidSpectrum("spectrum integers must be a non-empty integer array")
        if np.any(np.diff(m) >= 0):
            raise InvalidSpectrum("spectrum integers must be strictly decreasing")
        if np.any(np.diff(m) % 2 == 0):
            raise InvalidSpectrum(
                "consecutive spectrum integers must differ by odd amounts "
                "(evolution phases must alternate in sign)"
            )
        if not self.t0 > 0:
            raise InvalidSpectrum("t0 must be positive")
        m.setflags(write=False)
        object.__setattr__(self, "integers", m)

    @classmethod
    def linear(cls, n_sites: int, t0: float = np.pi / 2) -> PstSpectrum:
        """Equally spaced spectrum ``lambda_n = (N + 1 - 2n) pi / (2 t0)``."""
        k = n_sites + 1 - 2 * np.arange(1, n_sites + 1)
        return cls(np.floor_divide(k, 2), t0=t0, offset=0.5 if n_sites % 2 == 0 else 0.0)

    @classmethod
    def from_eigenvalues(cls, eigenvalues, t0: float = np.pi / 2, atol: float = 1e-9) -> PstSpectrum:
        x = np.asarray(eigenvalues, dtype=float) * t0 / np.pi
        offset = x[0] - np.floor(x[0])
        m = x - offset
        if not np.allclose(m, np.rint(m), atol=atol, rtol=0):
            raise InvalidSpectrum("eigenvalues are not integer-spaced multiples of pi/t0")
        return cls(np.rint(m).astype(np.int64), t0=t0, offset=float(offset))

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.pi * (self.integers + self.offset) / self.t0

    @property
    def n_sites(self) -> int:
        return int(self.integers.size)

    def phases(self) -> np.ndarray:
        """Evolution signs ``(-1)^(n+1)`` relative to the top eigenvalue."""
        return np.where(np.arange(self.n_sites) % 2 == 0, 1.0, -1.0)


def christandl_chain(n_sites: int, t0: float = np.pi / 2) -> ChainSpec:
    """Analytic chain ``J_n = (pi / 2 t0) sqrt(n (N - n))``, zero fields."""
    if n_sites < 2:
        raise InvalidSpectrum("a transfer chain needs at least two sites")
    n = np.arange(1, n_sites)
    return ChainSpec(np.zeros(n_sites), np.pi / (2 * t0) * np.sqrt(n * (n_sites - n)))


def pst_chain_from_spectrum(spec: PstSpectrum, tol: Tolerances = DEFAULT) -> ChainSpec:
    """The unique mirror-symmetric chain with this spectrum and positive couplings."""
    return lanczos_reconstruct(persymmetric_weights(spec.eigenvalues), tol)


def validate_synthesis_spectrum(eigenvalues, t0: float = np.pi / 2, angular_tol: float = 1e-9) -> bool:
    """True iff some global phase makes every ``exp(i(phi + lambda_n t0))`` equal to +-1."""
    lam = np.asarray(eigenvalues, dtype=float).reshape(-1)
    if lam.size <= 1:
        return True
    x = (lam - lam[0]) * t0 / np.pi
    return bool(np.all(np.pi * np.abs(x - np.rint(x)) <= angular_tol))
