"""Numerical designer for arbitrary real targets.

The spectrum is held fixed and the free entries of the first beta-column
(equivalently the first-site weights) are iterated by damped Gauss-Newton on
the output amplitudes.  Every iterate is built by Lanczos from the fixed
spectrum, so isospectrality holds by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULT, Tolerances
from .design import (
    DesignResult,
    ReferenceFrame,
    check_target,
    continuation,
    finish_design,
    free_directions,
    gauge_free_residual,
    output_from_weights,
    output_jacobian,
    pinned_base,
    structured_problem,
)
from .errors import (
    ConvergenceFailure,
    DegenerateMoment,
    InvalidSpectrum,
    InvalidTarget,
    InvalidWeights,
    RootNotBracketed,
)
from .pst import PstSpectrum
from .revival import ParityMask, RevivalSpec, parity_reduce
from .solvers import Infeasible, damped_newton
from .spectral import BetaTable, ChainSpec, TargetState

__all__ = [
    "SolverConfig",
    "geometric_alpha1",
    "initial_guess",
    "refine",
    "design_numeric",
    "weight_jacobian",
    "moment_fields",
    "w_state",
    "odd_site_target",
]


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 200
    residual_tol: float = 1e-12  # on 1 - fidelity
    step_control: float = 1.0  # first trial fraction of each Newton step
    parity_mask: ParityMask | None = None
    spectrum: PstSpectrum | None = None  # default: linear spectrum of the target length
    polish: bool = True  # keep iterating past residual_tol down to round-off

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if not 0 < self.step_control <= 1:
            raise ValueError("step_control must lie in (0, 1]")

    def spectrum_for(self, n_sites: int, t0: float) -> PstSpectrum:
        spec = self.spectrum or PstSpectrum.linear(n_sites, t0)
        if spec.n_sites != n_sites:
            raise InvalidSpectrum(f"spectrum has {spec.n_sites} values, target has {n_sites} sites")
        return spec


def w_state(n_sites: int, t0: float = np.pi / 2) -> TargetState:
    return TargetState(np.full(n_sites, 1.0 / np.sqrt(n_sites)), t0=t0)


def odd_site_target(n_sites: int, t0: float = np.pi / 2) -> TargetState:
    """``(|1> + sqrt(2) sum_{n>=1} |2n+1>)`` normalised, for odd N.

    Mirror-extending the resulting chain at equal splitting gives a W-state
    over the odd sites of a chain of length ``2N - 1``.
    """
    if n_sites % 2 == 0:
        raise InvalidTarget("the odd-site target needs odd N")
    a = np.zeros(n_sites)
    a[0] = 1.0
    a[2::2] = np.sqrt(2.0)
    return TargetState.normalized(a, t0=t0)


def _geometric_weights(n_sites: int, r: float) -> np.ndarray:
    k = np.arange(n_sites)
    if r == 1.0:
        return np.full(n_sites, 1.0 / n_sites)
    logw = k * np.log(r)
    w = np.exp(logw - logw.max())
    return w / w.sum()


def geometric_alpha1(n_sites: int, r: float) -> float:
    """Site-1 revival amplitude ``sum_n (-1)^(n+1) w_n`` of the geometric weights.

    Closed form ``(1 - r)(1 - (-r)^N) / ((1 + r)(1 - r^N))``.
    """
    return float(_geometric_weights(n_sites, r) @ np.where(np.arange(n_sites) % 2 == 0, 1.0, -1.0))


def initial_guess(n_sites: int, alpha1: float) -> np.ndarray:
    """Geometric weights ``w_n proportional to r^(n-1)`` with ``sum (-1)^(n+1) w_n = alpha1``.

    The site-1 amplitude of a PST-spectrum design equals that alternating sum,
    so this start already has the right revival at site 1.  ``r`` is found by
    bracketing on (0, 1), where the map is monotone decreasing from 1 to its
    r -> 1 limit (``1/N`` for odd N, 0 for even N).
    """
    if n_sites < 1:
        raise InvalidTarget("need at least one site")
    if n_sites == 1:
        return np.ones(1)
    if not abs(alpha1) < 1:
        raise RootNotBracketed("alpha1 must satisfy |alpha1| < 1")
    upper = 1.0 / n_sites if n_sites % 2 else 0.0
    if abs(alpha1 - upper) < 1e-15:
        return _geometric_weights(n_sites, 1.0)
    if not upper < alpha1 < 1:
        raise RootNotBracketed(
            f"alpha1 = {alpha1:.6g} is outside the range ({upper:.6g}, 1) reachable by geometric weights"
        )
    lo, hi = 1e-300, 1.0 - 1e-15

    def f(r):
        return geometric_alpha1(n_sites, r) - alpha1

    if f(hi) > 0:
        return _geometric_weights(n_sites, hi)
    r = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return _geometric_weights(n_sites, r)


def _free_entries(n_sites: int, mask: ParityMask | None) -> list[int]:
    free = list(range(2, n_sites))
    if mask is not None:
        free = mask.first_column_free(free)
    return free


def weight_jacobian(frame: ReferenceFrame, weights, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Derivative of the phase-referenced output amplitudes with respect to the weights.

    Column j is ``d out / d w_j`` for unnormalised weights fed through Lanczos
    (which normalises them).  This is the linearisation the refiner uses.
    """
    w = np.asarray(weights, dtype=float)
    out, _, _, q = output_from_weights(frame, w, tol)
    s = w.sum()
    jac = output_jacobian(frame, w / s, out, q)
    # chain rule through the normalisation w -> w / sum(w)
    return (jac - (jac @ (w / s))[:, None]) / s


def refine(target: TargetState, start, config: SolverConfig = SolverConfig(),
           tol: Tolerances = DEFAULT) -> DesignResult:
    """Damped Gauss-Newton from start weights towards ``target``.

    Parameters are the interior entries of the first beta-column (only those
    allowed by ``config.parity_mask``), with ``beta_1 = 1`` and
    ``beta_N = alpha_1`` pinned.  The residual is the gauge-free amplitude
    mismatch, whose half squared norm is ``1 - fidelity``; the history in
    ``diagnostics["history"]`` records it per accepted step and never
    increases.  On failure the best iterate is attached to the raised
    :class:`ConvergenceFailure`.
    """
    spectrum = config.spectrum_for(target.n_sites, target.t0)
    frame = ReferenceFrame(spectrum, tol)
    check_target(target, frame)
    n = target.n_sites
    w0 = np.asarray(start, dtype=float).reshape(-1)
    if w0.shape != (n,):
        raise InvalidWeights(f"start needs {n} weights")
    if np.any(w0 <= tol.weight_floor) or not np.all(np.isfinite(w0)):
        raise InvalidWeights("start weights must be positive")
    alpha1 = float(target.amplitudes[0])
    beta0 = frame.beta(w0 / w0.sum())
    free = _free_entries(n, config.parity_mask)
    base = pinned_base(n, alpha1)
    d = free_directions(n, free)
    x0 = beta0[np.asarray(free, dtype=int) - 1] if free else np.zeros(0)
    fun, jac = structured_problem(frame, target, base, d, tol)
    try:
        r0 = fun(x0)
    except Infeasible as exc:
        raise InvalidWeights("pinning beta_1 and beta_N leaves the start with non-positive weights") from exc
    initial_infidelity = 0.5 * float(r0 @ r0)
    sol = damped_newton(fun, x0, jac, cost_tol=config.residual_tol,
                        stop_tol=1e-32 if config.polish else config.residual_tol,
                        max_iter=config.max_iterations, damping=config.step_control)
    diagnostics = {
        "family": "numeric",
        # steps needed to reach residual_tol; later steps only polish
        "iterations": next((i for i, c in enumerate(sol.history) if c <= config.residual_tol), sol.iterations),
        "total_iterations": sol.iterations,
        "history": sol.history,
        "initial_infidelity": initial_infidelity,
        "free": free,
        "message": sol.message,
    }
    result = finish_design(frame, base + d @ sol.x, target, diagnostics, tol,
                           polish=config.polish, symmetric=config.parity_mask is not None)
    if result.infidelity > config.residual_tol:
        raise ConvergenceFailure(
            f"refinement stopped at 1 - fidelity = {result.infidelity:.3e} ({sol.message})",
            result, float(np.sqrt(2 * sol.cost)),
        )
    if config.parity_mask is not None:
        config.parity_mask.check(result.chain)
    return result


def design_numeric(target: TargetState, config: SolverConfig = SolverConfig(),
                   tol: Tolerances = DEFAULT, *, fallback: bool = True) -> DesignResult:
    """Geometric initial guess followed by :func:`refine`.

    When the geometric start is unavailable or refinement stalls, the target
    is approached by continuation from the end-pair design with the same
    site-1 amplitude (if ``fallback``).
    """
    n = target.n_sites
    a = target.amplitudes
    try:
        start = initial_guess(n, float(a[0]))
        return refine(target, start, config, tol)
    except (RootNotBracketed, InvalidWeights, ConvergenceFailure) as exc:
        if not fallback:
            raise
        failure = exc
    spectrum = config.spectrum_for(n, target.t0)
    frame = ReferenceFrame(spectrum, tol)
    free = _free_entries(n, config.parity_mask)
    begin = np.zeros(n)
    begin[0] = a[0]
    begin[-1] = np.sqrt(1.0 - a[0] ** 2)
    try:
        x, _ = continuation(frame, [begin, a], np.zeros(len(free)), free, tol=tol)
    except ConvergenceFailure as exc:
        raise ConvergenceFailure(f"numeric design failed: {failure}; {exc}",
                                 getattr(failure, "best", None), exc.residual) from exc
    weights = frame.weights(pinned_base(n, a[0]) + free_directions(n, free) @ x)
    return refine(target, weights, config, tol)


def _first_row_powers(reference: ChainSpec, count: int) -> np.ndarray:
    """Rows ``<1| H~^k`` for k = 0..count-1, rescaled per row to avoid overflow.

    Returns ``(rows, log_scale)`` so that the true row k is ``rows[k] * exp(log_scale[k])``.
    """
    h = reference.matrix()
    n = h.shape[0]
    rows = np.zeros((count, n))
    logs = np.zeros(count)
    v = np.zeros(n)
    v[0] = 1.0
    for k in range(count):
        s = float(np.max(np.abs(v))) or 1.0
        v = v / s
        logs[k] = (logs[k - 1] if k else 0.0) + np.log(s)
        rows[k] = v
        v = v @ h
    return rows, logs


def moment_fields(beta_columns, reference: ChainSpec, tol: Tolerances = DEFAULT):
    """Fields and squared couplings from moments of the beta-table.

    With ``m_k(n) = <1| H~^k |beta^(n)>``, the table fixes the designed chain
    through ratios of consecutive moments:

    ``B_n = m_n(n)/m_{n-1}(n) - m_{n-1}(n-1)/m_{n-2}(n-1)`` and
    ``J_n^2 = m_{n+1}(n)/m_{n-1}(n) - m_n(n-1)/m_{n-2}(n-1) - B_n m_n(n)/m_{n-1}(n)``,

    with the ``n-1`` terms absent for n = 1.  This is an independent route to
    the chain, used to cross-check Lanczos.  Raises :class:`DegenerateMoment`
    if a leading moment ``|m_{n-1}(n)|`` is below the moment floor.
    """
    beta = beta_columns.coefficients if isinstance(beta_columns, BetaTable) else np.asarray(beta_columns, float)
    n = beta.shape[0]
    if beta.shape != (n, n) or reference.n_sites != n:
        raise ValueError("beta table and reference must share one size")
    rows, logs = _first_row_powers(reference, n + 1)

    def ratio(k_num, k_den, col):
        num = rows[k_num] @ beta[:, col]
        den = rows[k_den] @ beta[:, col]
        if abs(den) * np.exp(logs[k_den]) < tol.moment_floor:
            raise DegenerateMoment(f"moment <1|H~^{k_den}|beta^({col + 1})> vanishes")
        return num / den * np.exp(logs[k_num] - logs[k_den])

    fields = np.zeros(n)
    j2 = np.zeros(max(n - 1, 0))
    for c in range(n):
        # c is the 0-based column; its leading moment has power c
        lead = ratio(c + 1, c, c)
        prev = ratio(c, c - 1, c - 1) if c > 0 else 0.0
        fields[c] = lead - prev
        if c < n - 1:
            second = ratio(c + 2, c, c)
            prev2 = ratio(c + 1, c - 1, c - 1) if c > 0 else 0.0
            j2[c] = second - prev2 - fields[c] * lead
    return fields, j2
