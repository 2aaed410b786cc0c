"""Shared machinery for every designer: the reference frame and design results.

A design is specified by the first column of its beta-table, i.e. the
coordinates of ``|v_1>`` in the ``|v~_m>`` basis of a perfect-transfer
reference chain.  Those coordinates map linearly onto first-site weights,
and the weights together with the fixed spectrum determine the chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import InvalidTarget, InvalidWeights
from .inverse import lanczos
from .pst import PstSpectrum, pst_chain_from_spectrum
from .spectral import (
    ChainSpec,
    TargetState,
    beta_residual,
    beta_table,
    eigensystem,
    fidelity,
    match_gauge,
)
from .solvers import Infeasible

__all__ = ["ReferenceFrame", "DesignResult", "output_from_weights", "output_jacobian", "gauge_free_residual"]


class ReferenceFrame:
    """A PST reference chain with its eigenbasis cached.

    ``vt[k, m]`` is ``<k|v~_m>``; ``phases[k]`` is the sign of
    ``exp(-i lambda_k t0)`` relative to the top eigenvalue.
    """

    def __init__(self, spectrum: PstSpectrum, tol: Tolerances = DEFAULT):
        self.spectrum = spectrum
        self.tol = tol
        self.chain = pst_chain_from_spectrum(spectrum, tol)
        es = eigensystem(self.chain, tol)
        self.eigenvalues = spectrum.eigenvalues
        self.vectors = es.vectors.T.copy()  # [k, m] = lambda~_{k,m}
        self.l1 = self.vectors[:, 0].copy()
        self.vt = self.l1[:, None] * self.vectors
        self.phases = spectrum.phases()
        self.t0 = spectrum.t0

    @classmethod
    def linear(cls, n_sites: int, t0: float = np.pi / 2) -> ReferenceFrame:
        return cls(PstSpectrum.linear(n_sites, t0))

    @property
    def n_sites(self) -> int:
        return self.spectrum.n_sites

    def weights(self, beta) -> np.ndarray:
        return self.vt @ np.asarray(beta, dtype=float)

    def beta(self, weights) -> np.ndarray:
        return self.vectors.T @ (np.asarray(weights, dtype=float) / self.l1)

    def mirror_weights(self, n: int) -> np.ndarray:
        """Weights pattern of ``|v~_n>``, i.e. ``lambda~_{k,1} lambda~_{k,n}``."""
        return self.vt[:, n - 1]


def output_from_weights(frame: ReferenceFrame, w, tol: Tolerances = DEFAULT):
    """Real output amplitudes (phase-referenced to the top eigenvalue) and the Lanczos data."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= tol.weight_floor):
        raise InvalidWeights(f"weights must be positive, min is {w.min():.3e}")
    b, j, q = lanczos(frame.eigenvalues, w / w.sum(), tol)
    out = q.T @ (frame.phases * q[:, 0])
    return out, b, j, q


def output_jacobian(frame: ReferenceFrame, w, out, q) -> np.ndarray:
    """Exact derivative of the output amplitudes with respect to the raw weights.

    With ``p_j`` the orthonormal polynomials of the weight measure evaluated at
    eigenvalue j, a weight perturbation changes each polynomial by a
    lower-triangular combination of the others; the result is
    ``d out / d w_j = z_j p(lambda_j) - L(p(lambda_j) p(lambda_j)^T) out`` with
    ``L`` the strict lower triangle plus half the diagonal.
    """
    w = np.asarray(w, dtype=float)
    p = q / np.sqrt(w)[:, None]  # p[j, n] = p_{n-1}(lambda_j)
    x = p * out[None, :]
    c = np.cumsum(x, axis=1) - 0.5 * x
    return (frame.phases[:, None] * p - p * c).T


def gauge_free_residual(out, amplitudes) -> np.ndarray:
    """Residual that vanishes iff ``|out| = |amplitudes|`` componentwise.

    Its squared norm equals ``2 (1 - F)`` with ``F`` the fidelity after the
    best sign gauge, for unit vectors.
    """
    a = np.abs(np.asarray(amplitudes, dtype=float))
    s = np.where(out < 0, -1.0, 1.0)
    return out - s * a


@dataclass(frozen=True, eq=False)
class DesignResult:
    chain: ChainSpec
    fidelity: float
    beta_first_column: np.ndarray
    weights: np.ndarray
    target: TargetState
    reference: ChainSpec
    spectrum: PstSpectrum
    diagnostics: dict = field(default_factory=dict)

    @property
    def infidelity(self) -> float:
        return 1.0 - self.fidelity

    @property
    def j_max(self) -> float:
        return float(np.max(np.abs(self.chain.couplings)))

    def beta_table(self):
        return beta_table(self.chain, self.reference)

    def beta_residual(self) -> float:
        return beta_residual(self.beta_table(), self.chain, self.reference)


def polish_weights(frame: ReferenceFrame, target: TargetState, weights, *, symmetric: bool = False,
                   max_iter: int = 20, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Newton polish of a near-solution in log-weight coordinates.

    When some weight is tiny, beta coordinates cannot resolve it to better
    than about ``eps / w_min``, which caps the attainable amplitude error.
    Log-weights measure changes relative to each weight and remove that cap.
    With ``symmetric`` the weights stay mirror-symmetric (zero fields on a
    symmetric spectrum).
    """
    w0 = np.asarray(weights, dtype=float)
    n = w0.size
    if symmetric:
        e = np.zeros((n, (n + 1) // 2))
        for k in range(e.shape[1]):
            e[k, k] = 1.0
            e[n - 1 - k, k] = 1.0
    else:
        e = np.eye(n)
    u0 = np.log(w0 / w0.sum())

    def weights_of(v):
        u = u0 + e @ v
        return np.exp(u - u.max())

    def fun(v):
        w = weights_of(v)
        try:
            out, _, _, _ = output_from_weights(frame, w, tol)
        except (InvalidWeights, ArithmeticError) as exc:
            raise Infeasible from exc
        return gauge_free_residual(out, target.amplitudes)

    def jac(v):
        w = weights_of(v)
        out, _, _, q = output_from_weights(frame, w, tol)
        s = w.sum()
        jw = output_jacobian(frame, w / s, out, q)
        jw = (jw - (jw @ (w / s))[:, None]) / s
        return (jw * w[None, :]) @ e

    from .solvers import damped_newton

    try:
        sol = damped_newton(fun, np.zeros(e.shape[1]), jac, cost_tol=1e-32, max_iter=max_iter)
    except Infeasible:
        return w0 / w0.sum()
    w = weights_of(sol.x)
    return w / w.sum()


def finish_design(frame: ReferenceFrame, beta, target: TargetState, diagnostics: dict | None = None,
                  tol: Tolerances = DEFAULT, *, polish: bool = False, symmetric: bool = False) -> DesignResult:
    """Weights -> Lanczos -> gauge fixed to the target's signs -> verified result.

    With ``polish`` the weights get a final log-weight Newton polish (see
    :func:`polish_weights`) and the reported beta column is recomputed from them.
    """
    beta = np.asarray(beta, dtype=float)
    w = frame.weights(beta)
    if np.any(w <= tol.weight_floor):
        raise InvalidWeights(f"design weights must be positive, min is {w.min():.3e}")
    w = w / w.sum()
    if polish:
        w = polish_weights(frame, target, w, symmetric=symmetric, tol=tol)
        beta = frame.beta(w)
    b, j, _ = lanczos(frame.eigenvalues, w, tol)
    chain = match_gauge(ChainSpec(b, j), target)
    f, _ = fidelity(chain, target)
    diag = dict(diagnostics or {})
    diag.setdefault("min_weight", float(w.min()))
    return DesignResult(chain, f, beta, w, target, frame.chain, frame.spectrum, diag)


def check_target(target: TargetState, frame: ReferenceFrame) -> None:
    if target.n_sites != frame.n_sites:
        raise InvalidTarget(f"target has {target.n_sites} sites, spectrum has {frame.n_sites}")
    if target.input_site != 1:
        raise InvalidTarget("designers inject the excitation at site 1")
    if not np.isclose(target.t0, frame.t0, rtol=1e-12, atol=0):
        raise InvalidTarget(f"target time {target.t0} differs from spectrum time {frame.t0}")


def structured_problem(frame: ReferenceFrame, target: TargetState, base, directions,
                       tol: Tolerances = DEFAULT):
    """Residual and exact Jacobian for ``beta = base + directions @ theta``."""
    base = np.asarray(base, dtype=float)
    d = np.asarray(directions, dtype=float).reshape(frame.n_sites, -1)
    dw = frame.vt @ d
    cache: dict = {}

    def evaluate(theta):
        key = np.asarray(theta, dtype=float).tobytes()
        if key not in cache:
            w = frame.weights(base + d @ theta)
            if np.any(w <= tol.weight_floor):
                raise Infeasible
            try:
                out, _, _, q = output_from_weights(frame, w, tol)
            except (InvalidWeights, ArithmeticError) as exc:
                raise Infeasible from exc
            cache.clear()
            cache[key] = (w, out, q)
        return cache[key]

    def fun(theta):
        _, out, _ = evaluate(theta)
        return gauge_free_residual(out, target.amplitudes)

    def jac(theta):
        w, out, q = evaluate(theta)
        return output_jacobian(frame, w, out, q) @ dw

    return fun, jac


def free_directions(n_sites: int, free) -> np.ndarray:
    """Unit columns selecting the listed (1-based) beta entries."""
    d = np.zeros((n_sites, len(free)))
    for i, m in enumerate(free):
        d[m - 1, i] = 1.0
    return d


def pinned_base(n_sites: int, alpha1: float) -> np.ndarray:
    """Beta column with ``beta_1 = 1``, ``beta_N = alpha1`` and zeros elsewhere."""
    base = np.zeros(n_sites)
    base[0] = 1.0
    base[-1] += alpha1
    return base


def continuation(frame: ReferenceFrame, waypoints, x0, free, *, initial_step: float = 0.02,
                 max_step: float = 0.1, min_step: float = 1e-4, step_cost: float = 1e-12,
                 tol: Tolerances = DEFAULT):
    """Track a solution while the target moves along straight legs between waypoints.

    ``waypoints`` are amplitude vectors; the first must be solved by
    ``x0`` (the free beta entries listed in ``free``, with ``beta_1 = 1`` and
    ``beta_N`` pinned to the site-1 amplitude).  Intermediate targets are the
    normalised linear interpolants.  The step along each leg grows after a
    success and halves after a failure; a secant predictor seeds each
    corrector solve.  Each corrector is polished to round-off but only needs
    ``step_cost`` to count as on the path; the caller judges the final fidelity.
    Returns ``(x, target)`` for the last waypoint.
    """
    from .errors import ConvergenceFailure
    from .solvers import damped_newton

    n = frame.n_sites
    d = free_directions(n, free)
    x = np.asarray(x0, dtype=float).copy()
    pts = [np.asarray(p, dtype=float) for p in waypoints]
    target = TargetState.normalized(pts[0], t0=frame.t0)
    for a0, a1 in zip(pts[:-1], pts[1:]):
        s, h = 0.0, initial_step
        x_prev, h_prev = None, None
        while s < 1.0:
            s_new = min(1.0, s + h)
            a = (1.0 - s_new) * a0 + s_new * a1
            trial_target = TargetState.normalized(a, t0=frame.t0)
            fun, jac = structured_problem(frame, trial_target, pinned_base(n, trial_target.amplitudes[0]), d, tol)
            seeds = [x]
            if x_prev is not None:
                seeds.insert(0, x + (x - x_prev) * (s_new - s) / h_prev)
            sol = None
            for seed in seeds:
                try:
                    sol = damped_newton(fun, seed, jac, cost_tol=step_cost, stop_tol=1e-30, max_iter=40)
                except Infeasible:
                    continue
                if sol.converged:
                    break
            if sol is not None and sol.converged:
                x_prev, h_prev = x, s_new - s
                x, s, target = sol.x, s_new, trial_target
                h = min(max_step, 1.5 * h)
            else:
                h *= 0.5
                if h < min_step:
                    raise ConvergenceFailure(f"continuation stalled at s = {s:.4f}", x,
                                             np.sqrt(2 * sol.cost) if sol is not None else float("nan"))
    return x, target
