"""Linear algebra of real symmetric tridiagonal (Jacobi) Hamiltonians.

Sites are numbered 1..N in docstrings and 0..N-1 in arrays.  Eigenvalues are
always sorted in decreasing order and every eigenvector is signed so that its
component on site 1 is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .config import DEFAULT, Tolerances
from .errors import InvalidChain, InvalidTarget, SpectrumMismatch

__all__ = [
    "ChainSpec",
    "EigenSystem",
    "TargetState",
    "BetaTable",
    "eigensystem",
    "evolve",
    "output_amplitudes",
    "fidelity",
    "v_basis",
    "beta_table",
    "beta_residual",
    "gauge_transform",
    "match_gauge",
    "basis_state",
]


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """On-site fields ``B`` (length N) and nearest-neighbour couplings ``J`` (N-1)."""

    fields: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        b = _frozen(self.fields)
        j = _frozen(self.couplings)
        object.__setattr__(self, "fields", b)
        object.__setattr__(self, "couplings", j)
        if b.size == 0:
            raise InvalidChain("a chain needs at least one site")
        if j.size != b.size - 1:
            raise InvalidChain(f"{b.size} fields need {b.size - 1} couplings, got {j.size}")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(j))):
            raise InvalidChain("chain entries must be finite")
        if np.any(j == 0.0):
            raise InvalidChain("zero coupling splits the chain")

    @property
    def n_sites(self) -> int:
        return int(self.fields.size)

    @classmethod
    def uniform_fields(cls, couplings, field_value: float = 0.0) -> ChainSpec:
        j = np.asarray(couplings, dtype=float)
        return cls(np.full(j.size + 1, field_value), j)

    def matrix(self) -> np.ndarray:
        h = np.diag(self.fields)
        if self.n_sites > 1:
            h += np.diag(self.couplings, 1) + np.diag(self.couplings, -1)
        return h

    def mirrored(self) -> ChainSpec:
        return ChainSpec(self.fields[::-1], self.couplings[::-1])

    def is_mirror_symmetric(self, tol: float = 1e-8) -> bool:
        return bool(
            np.allclose(self.fields, self.fields[::-1], atol=tol, rtol=0)
            and np.allclose(self.couplings, self.couplings[::-1], atol=tol, rtol=0)
        )

    def __repr__(self) -> str:
        return f"ChainSpec(n_sites={self.n_sites}, fields={self.fields!r}, couplings={self.couplings!r})"


@dataclass(frozen=True, eq=False)
class EigenSystem:
    eigenvalues: np.ndarray
    vectors: np.ndarray  # column n is the n-th eigenvector, rows are sites

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))
        v = np.array(self.vectors, dtype=float, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def first_row_weights(self) -> np.ndarray:
        return self.vectors[0] ** 2

    @property
    def n_sites(self) -> int:
        return int(self.eigenvalues.size)


@dataclass(frozen=True, eq=False)
class TargetState:
    """Real target amplitudes for ``|input_site> -> sum_n amplitudes[n] |n>`` at time ``t0``."""

    amplitudes: np.ndarray
    input_site: int = 1
    t0: float = np.pi / 2

    def __post_init__(self):
        a = _frozen(self.amplitudes)
        object.__setattr__(self, "amplitudes", a)
        if not np.all(np.isfinite(a)):
            raise InvalidTarget("amplitudes must be finite")
        if abs(float(a @ a) - 1.0) > 1e-12:
            raise InvalidTarget(f"amplitudes must have unit norm, got |a|^2={a @ a:.15g}")
        if not 1 <= self.input_site <= a.size:
            raise InvalidTarget(f"input_site {self.input_site} outside 1..{a.size}")
        if not self.t0 > 0:
            raise InvalidTarget("t0 must be positive")
        if self.input_site == 1 and a.size > 1 and a[-1] == 0.0:
            raise InvalidTarget(
                "target has no overlap with the far end of the chain (alpha_N = 0); "
                "no chain excited at site 1 can produce it"
            )

    @classmethod
    def normalized(cls, amplitudes, input_site: int = 1, t0: float = np.pi / 2) -> TargetState:
        a = np.asarray(amplitudes, dtype=float)
        norm = np.linalg.norm(a)
        if norm == 0:
            raise InvalidTarget("zero target vector")
        return cls(a / norm, input_site=input_site, t0=t0)

    @classmethod
    def from_sites(cls, n_sites: int, support: dict[int, float], **kw) -> TargetState:
        """Build a target from a ``{site: amplitude}`` mapping (1-based sites), then normalise."""
        a = np.zeros(n_sites)
        for site, amp in support.items():
            a[site - 1] = amp
        return cls.normalized(a, **kw)

    @property
    def n_sites(self) -> int:
        return int(self.amplitudes.size)


@dataclass(frozen=True, eq=False)
class BetaTable:
    """Entry ``[m-1, n-1]`` is the coefficient of ``|v~_m>`` in ``|v_n>``."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float, copy=True)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def first_column(self) -> np.ndarray:
        return self.coefficients[:, 0]

    @property
    def bottom_row(self) -> np.ndarray:
        return self.coefficients[-1, :]

    def structure_error(self) -> float:
        """Largest deviation from the fixed first row and the zero upper triangle."""
        c = self.coefficients
        n = c.shape[0]
        first = np.zeros(n)
        first[0] = 1.0
        upper = np.triu(c, 1)
        return float(max(np.max(np.abs(c[0] - first)), np.max(np.abs(upper), initial=0.0)))


def eigensystem(chain: ChainSpec, tol: Tolerances = DEFAULT) -> EigenSystem:
    if chain.n_sites == 1:
        return EigenSystem(chain.fields.copy(), np.ones((1, 1)))
    vals, vecs = eigh_tridiagonal(chain.fields, chain.couplings)
    vals = vals[::-1]
    vecs = vecs[:, ::-1]
    scale = max(float(np.max(np.abs(vals))), np.finfo(float).tiny)
    if np.min(-np.diff(vals)) < tol.degeneracy_gap * scale:
        raise InvalidChain("spectrum is numerically degenerate; couplings too small")
    # sign convention: first nonzero component of each eigenvector positive
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-300)
        if nz.size and col[nz[0]] < 0:
            vecs[:, k] = -col
    return EigenSystem(vals, vecs)


def basis_state(n_sites: int, site: int) -> np.ndarray:
    e = np.zeros(n_sites, dtype=complex)
    e[site - 1] = 1.0
    return e


def evolve(chain: ChainSpec, state, t: float, system: EigenSystem | None = None) -> np.ndarray:
    """Return ``exp(-iHt) @ state``."""
    es = system if system is not None else eigensystem(chain)
    psi = np.asarray(state, dtype=complex)
    v = es.vectors
    return v @ (np.exp(-1j * es.eigenvalues * t) * (v.T @ psi))


def output_amplitudes(chain: ChainSpec, t0: float = np.pi / 2, input_site: int = 1,
                      system: EigenSystem | None = None) -> np.ndarray:
    return evolve(chain, basis_state(chain.n_sites, input_site), t0, system)


def fidelity(chain: ChainSpec, target: TargetState,
             system: EigenSystem | None = None) -> tuple[float, float]:
    """Return ``(|<psi_T|exp(-iHt0)|input>|, arg of the overlap)``."""
    if target.n_sites != chain.n_sites:
        raise InvalidTarget(f"target has {target.n_sites} sites, chain has {chain.n_sites}")
    out = output_amplitudes(chain, target.t0, target.input_site, system)
    overlap = complex(target.amplitudes @ out)
    return min(abs(overlap), 1.0), float(np.angle(overlap))


def v_basis(chain: ChainSpec, system: EigenSystem | None = None) -> np.ndarray:
    """Matrix whose column m holds ``<k|v_m> = lambda_{k,1} lambda_{k,m}`` over eigen-index k."""
    es = system if system is not None else eigensystem(chain)
    v = es.vectors
    return v[0][:, None] * v.T


def _check_same_spectrum(a: EigenSystem, b: EigenSystem, tol: float) -> None:
    if a.n_sites != b.n_sites:
        raise SpectrumMismatch(f"chain sizes differ: {a.n_sites} vs {b.n_sites}")
    scale = max(1.0, float(np.max(np.abs(b.eigenvalues))))
    gap = float(np.max(np.abs(a.eigenvalues - b.eigenvalues)))
    if gap > tol * scale:
        raise SpectrumMismatch(f"spectra differ by {gap:.3e}")


def beta_table(chain: ChainSpec, reference: ChainSpec, tol: Tolerances = DEFAULT) -> BetaTable:
    """Coordinates of the ``|v_n>`` basis of ``chain`` in the ``|v~_m>`` basis of ``reference``."""
    es = eigensystem(chain, tol)
    ref = eigensystem(reference, tol)
    _check_same_spectrum(es, ref, tol.spectrum_match)
    vv = v_basis(chain, es)
    # v~ = diag(l~_1) U~ with U~ orthogonal, so each column solve is a scaled transpose
    inv = ref.vectors / ref.vectors[0][None, :]
    return BetaTable(inv @ vv)


def beta_residual(table: BetaTable, chain: ChainSpec, reference: ChainSpec) -> float:
    """Max-abs violation of ``H~ beta = beta H`` (the intertwining relation of the table)."""
    b = table.coefficients
    if b.shape != (chain.n_sites, chain.n_sites) or reference.n_sites != chain.n_sites:
        raise ValueError("table and chains must share the same size")
    r = reference.matrix() @ b - b @ chain.matrix()
    return float(np.max(np.abs(r)))


def gauge_transform(chain: ChainSpec, signs) -> ChainSpec:
    """Conjugate by ``diag(signs)``; fields are unchanged, ``J_k`` picks up ``s_k s_{k+1}``."""
    s = np.asarray(signs, dtype=float)
    if s.shape != (chain.n_sites,) or not np.all(np.abs(s) == 1):
        raise ValueError("signs must be a +-1 vector of chain length")
    return ChainSpec(chain.fields, chain.couplings * s[:-1] * s[1:])


def match_gauge(chain: ChainSpec, target: TargetState) -> ChainSpec:
    """Flip site signs so that the evolved amplitudes carry the target's signs.

    Only meaningful when the output is real up to one global phase, which is
    the case for any chain whose spectrum satisfies the synthesis condition.
    For input at site 1 the phase reference is ``exp(-i lambda_1 t0)``, the
    convention under which the bottom row of the beta-table equals the output.
    """
    es = eigensystem(chain)
    out = output_amplitudes(chain, target.t0, target.input_site, es)
    a = target.amplitudes
    inp = target.input_site - 1
    if inp == 0:
        phase = np.exp(-1j * es.eigenvalues[0] * target.t0)
    else:
        ref = int(np.argmax(np.abs(a) * np.abs(out)))
        phase = out[ref] / abs(out[ref]) * np.sign(a[ref])
    real = (out / phase).real
    s = np.where((a != 0) & (real != 0), np.sign(a) * np.sign(real), 1.0)
    g = s[inp] if a[inp] != 0 else 1.0
    signs = g * s
    signs[inp] = 1.0
    return gauge_transform(chain, signs)
