"""Analytic fractional-revival designers.

Each designer writes down the first beta-column of the design in the
reference PST frame, leaving at most a handful of unknowns, solves for them,
and hands the resulting weights to the Lanczos reconstruction.  Every valid
root is returned; callers choose among them (e.g. by ``j_max``).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

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
    pinned_base,
    structured_problem,
)
from .errors import (
    ConvergenceFailure,
    InvalidTarget,
    InvalidWeights,
    NoValidRoot,
    NumericalBreakdown,
    PatternMismatch,
)
from .inverse import lanczos
from .pst import PstSpectrum
from .solvers import Infeasible, damped_newton
from .spectral import ChainSpec, TargetState

__all__ = [
    "Family",
    "RevivalSpec",
    "ParityMask",
    "design_end_pair",
    "triple_normalization_roots",
    "design_triple",
    "design_last_k",
    "design_small_r",
    "parity_reduce",
]


class Family(Enum):
    END_PAIR = "end-pair"
    TRIPLE = "triple"
    LAST_K = "last-k"
    SMALL_R = "small-r"
    GENERAL = "general"


@dataclass(frozen=True, eq=False)
class RevivalSpec:
    """A sparse target ``|1> -> sum over support`` on a PST spectrum."""

    target: TargetState
    spectrum: PstSpectrum

    def __post_init__(self):
        if self.target.n_sites != self.spectrum.n_sites:
            raise InvalidTarget("target and spectrum sizes differ")

    @classmethod
    def from_support(cls, n_sites: int, support: dict[int, float],
                     spectrum: PstSpectrum | None = None, t0: float = np.pi / 2) -> RevivalSpec:
        spectrum = spectrum or PstSpectrum.linear(n_sites, t0)
        return cls(TargetState.from_sites(n_sites, support, t0=spectrum.t0), spectrum)

    @property
    def n_sites(self) -> int:
        return self.target.n_sites

    @property
    def support(self) -> list[int]:
        return [int(i) + 1 for i in np.flatnonzero(self.target.amplitudes)]

    @property
    def family(self) -> Family:
        n = self.n_sites
        tail = [s for s in self.support if s != 1]
        if tail == [n]:
            return Family.END_PAIR
        if tail == [n - 1, n]:
            return Family.TRIPLE
        k = n + 1 - min(tail)
        if k < n / 2:
            return Family.LAST_K
        if len(tail) == 2 and tail[0] in (2, 3):
            return Family.SMALL_R
        return Family.GENERAL

    def parity_pattern_holds(self) -> bool:
        a = self.target.amplitudes
        n = self.n_sites
        return bool(np.all(a[n - 2::-2] == 0.0))


@dataclass(frozen=True, eq=False)
class ParityMask:
    """``mask[m-1, n-1]`` is True where beta^(n)_m may be nonzero (n + m even)."""

    mask: np.ndarray

    def first_column_free(self, candidates) -> list[int]:
        return [m for m in candidates if self.mask[m - 1, 0]]

    def check(self, chain: ChainSpec, atol: float = 1e-10) -> None:
        worst = float(np.max(np.abs(chain.fields)))
        if worst > atol:
            raise PatternMismatch(f"parity-reduced design has a nonzero field ({worst:.3e})")


def parity_reduce(spec: RevivalSpec) -> ParityMask:
    """Beta-table sparsity for targets vanishing on sites N-1, N-3, ...

    Requires a reference with zero fields (a spectrum symmetric about zero);
    the designed chain then has zero fields too.
    """
    if not spec.parity_pattern_holds():
        raise PatternMismatch("target must vanish on sites N-1, N-3, ...")
    lam = spec.spectrum.eigenvalues
    if not np.allclose(lam, -lam[::-1], atol=1e-12, rtol=0):
        raise PatternMismatch("parity reduction needs a spectrum symmetric about zero")
    n = spec.n_sites
    idx = np.arange(1, n + 1)
    mask = (idx[:, None] + idx[None, :]) % 2 == 0
    mask.setflags(write=False)
    return ParityMask(mask)


def _frame(spectrum: PstSpectrum | None, n_sites: int, t0: float, tol: Tolerances) -> ReferenceFrame:
    spectrum = spectrum or PstSpectrum.linear(n_sites, t0)
    if spectrum.n_sites != n_sites:
        raise InvalidTarget(f"spectrum has {spectrum.n_sites} values, need {n_sites}")
    return ReferenceFrame(spectrum, tol)


def _end_pair_beta(n: int, alpha1: float) -> np.ndarray:
    beta = np.zeros(n)
    beta[0] = 1.0
    beta[-1] += alpha1
    return beta


def design_end_pair(n_sites: int, alpha1: float, t0: float = np.pi / 2,
                    spectrum: PstSpectrum | None = None, tol: Tolerances = DEFAULT,
                    alpha_n_floor: float = 1e-6) -> DesignResult:
    """``|1> -> alpha1 |1> + sqrt(1 - alpha1^2) |N>``.

    The first beta-column is ``(1, 0, ..., 0, alpha1)``, so the weights are
    ``lambda~_{n,1}^2 (1 + alpha1 (-1)^(n+1))``.
    """
    alpha_n = np.sqrt(max(0.0, 1.0 - alpha1 * alpha1))
    if not -1 < alpha1 < 1 or alpha_n < alpha_n_floor:
        raise InvalidTarget(f"alpha_N = {alpha_n:.3e} is below the end-overlap floor {alpha_n_floor}")
    frame = _frame(spectrum, n_sites, t0, tol)
    a = np.zeros(n_sites)
    a[0] += alpha1
    a[-1] += alpha_n
    if n_sites == 1:
        raise InvalidTarget("end-pair revival needs at least two sites")
    target = TargetState.normalized(a, t0=frame.t0)
    beta = _end_pair_beta(n_sites, alpha1)
    w = frame.weights(beta)
    # alternating mirror symmetry makes every weight a positive multiple of lambda~_{n,1}^2
    assert np.all(w > 0), "end-pair weights must be positive for |alpha1| < 1"
    return finish_design(frame, beta, target, {"family": Family.END_PAIR.value}, tol)


def _triple_terms(frame: ReferenceFrame, alpha1: float):
    ref = frame.chain
    c = frame.l1**2 / (1.0 + alpha1 * frame.phases)
    d = (frame.eigenvalues - ref.fields[0]) / ref.couplings[0]
    d[np.abs(d) < 1e-12 * np.max(np.abs(d))] = 0.0
    return c, d


def triple_normalization_roots(frame: ReferenceFrame, alpha1: float, alpha_n: float) -> dict:
    """All real roots of the normalisation condition for ``beta^(1)_2``.

    The condition is ``1 = alpha_N^2 sum_n c_n / (1 + beta d_n)`` with
    ``c_n = lambda~_{n,1}^2 / (1 + alpha1 (-1)^(n+1))`` and
    ``d_n = (lambda_n - B~_1) / J~_1``.  Each interval between consecutive
    poles is scanned and every sign change bisected.  The roots in the
    interval containing zero are the ones with positive weights; on that
    interval the function is convex so exactly two roots exist when
    ``alpha_{N-1} != 0``.

    Returns ``{"all": sorted roots, "feasible": roots with positive weights}``.
    """
    c, d = _triple_terms(frame, alpha1)
    a2 = alpha_n * alpha_n

    def f(b):
        return a2 * np.sum(c / (1.0 + b * d)) - 1.0

    poles = np.unique(-1.0 / d[d != 0])
    lo_f = -1.0 / d.max()
    hi_f = -1.0 / d.min()
    roots: list[float] = []
    f0 = f(0.0)
    if abs(f0) < 1e-14:
        feasible = [0.0]
    else:
        feasible = []
        eps = 1e-15
        if f0 < 0:
            for a, b in ((lo_f, 0.0), (0.0, hi_f)):
                # walk towards the pole until the sign flips
                edge = b if a == 0.0 else a
                t = 0.5
                x = edge * t
                while f(x) < 0 and t < 1 - eps:
                    t = 1 - (1 - t) * 0.5
                    x = edge * t
                if f(x) > 0:
                    lo, hi = (x, 0.0) if a != 0.0 else (0.0, x)
                    feasible.append(brentq(f, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500))
    roots.extend(feasible)
    # remaining intervals: scan with points clustered near the poles
    edges = np.concatenate(([poles[0] - 10 * (1 + abs(poles[0]))], poles, [poles[-1] + 10 * (1 + abs(poles[-1]))]))
    u = np.linspace(0, 1, 401)[1:-1]
    grid = 0.5 - 0.5 * np.cos(np.pi * u)
    for a, b in zip(edges[:-1], edges[1:]):
        if a <= 0.0 <= b and lo_f <= a + 1e-300 and b <= hi_f + 1e-300:
            continue
        xs = a + (b - a) * grid
        fs = np.array([f(x) for x in xs])
        for i in np.flatnonzero(np.sign(fs[:-1]) * np.sign(fs[1:]) < 0):
            roots.append(brentq(f, xs[i], xs[i + 1], xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500))
    # exact polynomial clearing for short chains, used to polish and to catch close pairs
    if frame.n_sites <= 8:
        poly = np.poly1d([0.0])
        for n in range(frame.n_sites):
            term = np.poly1d([a2 * c[n]])
            for m in range(frame.n_sites):
                if m != n:
                    term = term * np.poly1d([d[m], 1.0])
            poly = poly + term
        full = np.poly1d([1.0])
        for m in range(frame.n_sites):
            full = full * np.poly1d([d[m], 1.0])
        coeffs = (poly - full).coeffs
        coeffs = np.trim_zeros(np.where(np.abs(coeffs) < 1e-12 * np.max(np.abs(coeffs)), 0.0, coeffs), "f")
        for z in np.roots(coeffs):
            if abs(z.imag) < 1e-9 and not any(abs(z.real - r) < 1e-7 for r in roots):
                x = z.real
                for _ in range(3):
                    h = 1e-7 * max(1.0, abs(x))
                    x -= f(x) * 2 * h / (f(x + h) - f(x - h))
                roots.append(float(x))
    roots = sorted(set(float(r) for r in roots))
    return {"all": roots, "feasible": sorted(feasible, key=lambda b: (round(abs(b), 9), b))}


def design_triple(n_sites: int, alpha1: float, alpha_n1: float, alpha_n: float,
                  t0: float = np.pi / 2, spectrum: PstSpectrum | None = None,
                  tol: Tolerances = DEFAULT) -> list[DesignResult]:
    """``|1> -> alpha1 |1> + alpha_{N-1} |N-1> + alpha_N |N>``; one design per valid root.

    With ``beta^(1)_{N+1-m} = alpha1 beta^(1)_m`` and all middle entries zero,
    ``|v_1> = |v~_1> + alpha1 |v~_N> + b (|v~_2> + alpha1 |v~_{N-1}>)`` and
    only ``b`` is unknown.  Results are sorted by ``|b|``, negative first on ties.
    """
    if n_sites < 4:
        raise InvalidTarget("the triple family needs N >= 4")
    if alpha_n == 0:
        raise InvalidTarget("alpha_N = 0: the target must overlap the end of the chain")
    frame = _frame(spectrum, n_sites, t0, tol)
    a = np.zeros(n_sites)
    a[0], a[-2], a[-1] = alpha1, alpha_n1, alpha_n
    norm = a @ a
    if abs(norm - 1.0) > 1e-9:
        raise InvalidTarget(f"amplitudes must have unit norm, got {norm:.12g}")
    target = TargetState.normalized(a, t0=frame.t0)
    a = target.amplitudes
    roots = triple_normalization_roots(frame, a[0], a[-1])
    results = []
    for b in roots["feasible"]:
        beta = _end_pair_beta(n_sites, a[0])
        beta[1] += b
        beta[-2] += a[0] * b
        try:
            res = finish_design(frame, beta, target,
                                {"family": Family.TRIPLE.value, "beta2": b, "all_roots": roots["all"]}, tol)
        except (InvalidWeights, NumericalBreakdown):
            continue
        results.append(res)
    if not results:
        raise NoValidRoot("no root of the normalisation condition gives positive weights")
    return results


def _dedupe(results: list[DesignResult], atol: float = 1e-6) -> list[DesignResult]:
    kept: list[DesignResult] = []
    for r in results:
        if not any(np.max(np.abs(r.beta_first_column - k.beta_first_column)) < atol for k in kept):
            kept.append(r)
    return kept


def _starts(n_free: int, scales=(0.0, 0.05, 0.2, 0.5), seed: int = 0) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    starts = [np.zeros(n_free)]
    for s in scales[1:]:
        for i in range(n_free):
            for sign in (1.0, -1.0):
                x = np.zeros(n_free)
                x[i] = sign * s
                starts.append(x)
        starts.extend(s * rng.standard_normal((2 * n_free, n_free)))
    return starts


def _continuation_design(frame: ReferenceFrame, target: TargetState, mask: ParityMask | None,
                         diagnostics: dict, tol: Tolerances) -> DesignResult:
    """Deform the end-pair design with the same site-1 amplitude into ``target``.

    Every interior beta entry allowed by ``mask`` is free.
    """
    n = frame.n_sites
    a = target.amplitudes
    start = np.zeros(n)
    start[0] = a[0]
    start[-1] = np.sqrt(1.0 - a[0] ** 2)
    free = list(range(2, n))
    if mask is not None:
        free = mask.first_column_free(free)
    x, reached = continuation(frame, [start, a], np.zeros(len(free)), free, tol=tol)
    beta = pinned_base(n, reached.amplitudes[0]) + free_directions(n, free) @ x
    return finish_design(frame, beta, target, {**diagnostics, "method": "continuation"}, tol,
                         polish=True, symmetric=mask is not None)


def design_last_k(n_sites: int, amplitudes, t0: float = np.pi / 2,
                  spectrum: PstSpectrum | None = None, *, parity: bool | None = None,
                  fidelity_tol: float = 1e-7, max_iterations: int = 200,
                  tol: Tolerances = DEFAULT) -> list[DesignResult]:
    """Targets supported on site 1 and the last k sites (k < N/2).

    ``amplitudes`` is the full length-N target vector.  The first beta-column
    has free entries ``beta_2..beta_k`` mirrored as ``beta_{N+1-m} = alpha1 beta_m``;
    they are found by damped Newton on the output-amplitude moduli, started
    at the end-pair solution and at a fixed set of perturbed points.  With
    ``parity`` (default: whenever the target pattern allows it) only odd-m
    entries are free and the designed fields vanish.

    Targets that also occupy sites 2 or 3 (a small-r head combined with a
    last-k tail) are reached by continuation from the end-pair design, with
    every interior beta entry free.  The same continuation is the fallback
    when no start converges.
    """
    target = TargetState.normalized(amplitudes, t0=t0 if spectrum is None else spectrum.t0)
    if target.n_sites != n_sites:
        raise InvalidTarget(f"expected {n_sites} amplitudes")
    frame = _frame(spectrum, n_sites, target.t0, tol)
    check_target(target, frame)
    a = target.amplitudes
    occupied = np.flatnonzero(a[1:]) + 2
    head = occupied[occupied <= min(3, n_sites // 2)]
    tail = occupied[occupied > min(3, n_sites // 2)]
    if tail.size == 0:
        raise InvalidTarget("alpha_N = 0: the target must overlap the end of the chain")
    k = n_sites + 1 - int(tail.min())
    if not k < n_sites / 2:
        raise InvalidTarget(f"support reaches site {tail.min()}, so k = {k} is not below N/2")
    spec = RevivalSpec(target, frame.spectrum)
    mask = None
    if parity is None:
        parity = spec.parity_pattern_holds() and np.allclose(frame.chain.fields, 0, atol=1e-12)
    if parity:
        mask = parity_reduce(spec)
    diag = {"family": Family.LAST_K.value, "k": k, "parity": bool(parity)}
    if head.size:
        res = _continuation_design(frame, target, mask, {**diag, "head": head.tolist()}, tol)
        if res.infidelity > fidelity_tol:
            raise ConvergenceFailure("continuation ended off target", res, np.sqrt(2 * res.infidelity))
        if mask is not None:
            mask.check(res.chain)
        return [res]
    free = list(range(2, k + 1))
    if mask is not None:
        free = mask.first_column_free(free)
    base = _end_pair_beta(n_sites, a[0])
    if not free:
        return [finish_design(frame, base, target, {"family": Family.LAST_K.value, "k": k}, tol)]
    d = np.zeros((n_sites, len(free)))
    for i, m in enumerate(free):
        d[m - 1, i] = 1.0
        d[n_sites - m, i] += a[0]
    fun, jac = structured_problem(frame, target, base, d, tol)
    results = []
    best = None
    for x0 in _starts(len(free)):
        try:
            fun(x0)
        except Infeasible:
            continue
        sol = damped_newton(fun, x0, jac, cost_tol=1e-30, max_iter=max_iterations)
        if best is None or sol.cost < best.cost:
            best = sol
        if sol.cost > 1e-6 * fidelity_tol:
            continue
        res = finish_design(frame, base + d @ sol.x, target,
                            {"family": Family.LAST_K.value, "k": k, "free": free,
                             "iterations": sol.iterations, "parity": bool(parity)}, tol,
                            polish=True, symmetric=mask is not None)
        if res.infidelity <= fidelity_tol:
            results.append(res)
    results = _dedupe(results)
    if not results:
        try:
            results = [_continuation_design(frame, target, mask, diag, tol)]
        except (ConvergenceFailure, InvalidWeights, ArithmeticError):
            results = []
        if not results or results[0].infidelity > fidelity_tol:
            raise ConvergenceFailure("no start converged for the last-k system", best,
                                     np.sqrt(2 * best.cost) if best else float("nan"))
    if mask is not None:
        for r in results:
            mask.check(r.chain)
    return sorted(results, key=lambda r: r.j_max)


def _small_r_operator(frame: ReferenceFrame, r: int, fields, couplings) -> np.ndarray:
    """Matrix ``M`` with ``beta^(r) = M beta^(1)`` given the first r-1 fields/couplings."""
    h = frame.chain.matrix()
    eye = np.eye(frame.n_sites)
    prev, cur = np.zeros_like(h), eye
    for j in range(r - 1):
        nxt = ((h - fields[j] * eye) @ cur - (couplings[j - 1] * prev if j > 0 else 0.0)) / couplings[j]
        prev, cur = cur, nxt
    return cur


def design_small_r(n_sites: int, alpha1: float, alpha_r: float, alpha_n: float, r: int,
                   t0: float = np.pi / 2, spectrum: PstSpectrum | None = None, *,
                   parity: bool | None = None, fidelity_tol: float = 1e-7,
                   tol: Tolerances = DEFAULT) -> list[DesignResult]:
    """``|1> -> alpha1 |1> + alpha_r |r> + alpha_N |N>`` for r in {2, 3}.

    The relation ``alpha_r beta^(r) = (S - alpha1) beta^(1) - alpha_N^2 e_N``
    is linear in ``beta^(1)`` once the first r-1 fields and couplings are
    fixed.  Those are the unknowns; they are fixed by ``beta_1 = 1``,
    ``beta_N = alpha1`` and by agreement with the fields and couplings that
    the resulting weights actually generate.
    """
    if r not in (2, 3):
        raise InvalidTarget("small-r family covers r = 2 and r = 3")
    if alpha_n == 0:
        raise InvalidTarget("alpha_N = 0: the target must overlap the end of the chain")
    frame = _frame(spectrum, n_sites, t0, tol)
    a = np.zeros(n_sites)
    a[0] += alpha1
    a[r - 1] += alpha_r
    a[-1] += alpha_n
    if abs(a @ a - 1.0) > 1e-9:
        raise InvalidTarget(f"amplitudes must have unit norm, got {a @ a:.12g}")
    target = TargetState.normalized(a, t0=frame.t0)
    a = target.amplitudes
    if alpha_r == 0:
        return [design_end_pair(n_sites, a[0], frame.t0, frame.spectrum, tol)]
    spec = RevivalSpec(target, frame.spectrum)
    if parity is None:
        parity = spec.parity_pattern_holds() and np.allclose(frame.chain.fields, 0, atol=1e-12)
    mask = parity_reduce(spec) if parity else None

    n = n_sites
    swap = np.eye(n)[::-1]
    rhs = np.zeros(n)
    rhs[-1] = -a[-1] ** 2
    nb = 0 if parity else r - 1

    def unpack(x):
        fields = np.zeros(r - 1) if parity else x[:nb]
        return fields, x[nb:]

    def make(alpha_r):
        # the Lanczos gauge (J > 0) fixes the sign of alpha_r, so both signs are tried
        def beta_of(x):
            fields, couplings = unpack(x)
            if np.any(couplings <= 1e-8):
                raise Infeasible
            m = alpha_r * _small_r_operator(frame, r, fields, couplings) - swap + a[0] * np.eye(n)
            try:
                return np.linalg.solve(m, rhs)
            except np.linalg.LinAlgError as exc:
                raise Infeasible from exc

        def fun(x):
            beta = beta_of(x)
            w = frame.weights(beta)
            if np.any(w <= tol.weight_floor):
                raise Infeasible
            try:
                b, j, _ = lanczos(frame.eigenvalues, w / w.sum(), tol)
            except ArithmeticError as exc:
                raise Infeasible from exc
            fields, couplings = unpack(x)
            res = [beta[0] - 1.0, beta[-1] - a[0]]
            if not parity:
                res.extend(b[: r - 1] - fields)
            res.extend(j[: r - 1] - couplings)
            return np.array(res)

        return beta_of, fun

    ref = frame.chain
    factors = np.geomspace(0.25, 4.0, 12)
    starts = []
    for f1 in factors:
        for f2 in (factors if r == 3 else [None]):
            couplings = [ref.couplings[0] * f1] + ([ref.couplings[1] * f2] if r == 3 else [])
            for shift in ([0.0] if parity else [-1.0, -0.5, 0.0, 0.5, 1.0]):
                fields = [] if parity else list(ref.fields[: r - 1] + shift * ref.couplings[0])
                starts.append(np.array(fields + couplings, dtype=float))
    results = []
    best = None
    for sign in (1.0, -1.0):
        beta_of, fun = make(sign * abs(a[r - 1]))
        for x0 in starts:
            try:
                fun(x0)
            except Infeasible:
                continue
            sol = damped_newton(fun, x0, cost_tol=1e-28, max_iter=100)
            if best is None or sol.cost < best.cost:
                best = sol
            if sol.cost > 1e-18:
                continue
            try:
                res = finish_design(frame, beta_of(sol.x), target,
                                    {"family": Family.SMALL_R.value, "r": r, "parity": bool(parity),
                                     "unknowns": sol.x.tolist()}, tol,
                                    polish=True, symmetric=mask is not None)
            except (InvalidWeights, ArithmeticError):
                continue
            if res.infidelity <= fidelity_tol:
                results.append(res)
    results = _dedupe(results)
    if not results:
        try:
            res = _continuation_design(frame, target, mask,
                                       {"family": Family.SMALL_R.value, "r": r, "parity": bool(parity)}, tol)
            if res.infidelity <= fidelity_tol:
                results = [res]
        except (ConvergenceFailure, InvalidWeights, ArithmeticError):
            pass
    if not results:
        if best is None:
            raise NoValidRoot("no starting point gave positive weights")
        raise ConvergenceFailure("no start converged for the small-r system", best, np.sqrt(2 * best.cost))
    if mask is not None:
        for res in results:
            mask.check(res.chain)
    return sorted(results, key=lambda r_: r_.j_max)
