"""Speed metrics, coupling-product bounds, a gate-model comparator and robustness sweeps."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from math import lgamma

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from .errors import UnsupportedTarget
from .spectral import ChainSpec, TargetState, basis_state, eigensystem, evolve

__all__ = [
    "SpeedReport",
    "RobustnessReport",
    "speed_report",
    "lower_bound",
    "asymptotic_bound",
    "linear_w_state_bound",
    "gate_model_time",
    "gate_model_simulation",
    "robustness_sweep",
    "perturbed_fidelities",
]

PUBLISHED_GATE_TIME_N21 = 23.0  # value quoted in the literature for N = 21; see README


@dataclass(frozen=True)
class SpeedReport:
    j_max: float
    j_max_t0: float
    coupling_product: float
    lower_bound_exact: float
    lower_bound_asymptotic: float
    product_identity_error: float  # relative error of prod J = (alpha_N / alpha~_N) prod J~

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RobustnessReport:
    perturbation_fraction: float
    trials: int
    mean_fidelity: float
    best_fidelity: float
    std_fidelity: float
    rng_seed: int
    mode: str = "auto"
    worst_fidelity: float = float("nan")

    def to_dict(self) -> dict:
        return asdict(self)


def _log_abs_product(x) -> float:
    return float(np.sum(np.log(np.abs(np.asarray(x, dtype=float)))))


def asymptotic_bound(n_sites: int) -> float:
    """Large-N form ``pi (N - 1) / (2 e)`` of the bound for the linear spectrum."""
    return np.pi * (n_sites - 1) / (2 * np.e)


def lower_bound(m, w: float, alpha_n: float, alpha_n_ref: float = 1.0, t0: float = np.pi / 2) -> float:
    """Bound ``J_max t0 > pi (w alpha_N / alpha~_N |prod_{n != k} m_n|)^(1/(N-1))``.

    ``m`` are the spectrum integers (``lambda_n = pi m_n / t0``) with exactly
    one zero, at index k; ``w`` is the reference weight at that eigenvalue.
    The reference coupling product equals ``w |p'(0)|`` for a mirror-symmetric
    chain, and the maximum coupling is at least the geometric mean.  The
    result is dimensionless and independent of ``t0``, which is accepted for
    a uniform call signature.
    """
    m = np.asarray(m, dtype=float).reshape(-1)
    zero = np.flatnonzero(m == 0)
    if zero.size != 1:
        raise ValueError("exactly one spectrum integer must be zero")
    if not (0 < w <= 1 and 0 < abs(alpha_n) <= 1 and 0 < abs(alpha_n_ref) <= 1):
        raise ValueError("w and the end amplitudes must lie in (0, 1]")
    n = m.size
    if n == 1:
        return 0.0
    log_prod = _log_abs_product(np.delete(m, zero[0])) + np.log(w * abs(alpha_n) / abs(alpha_n_ref))
    return float(np.pi * np.exp(log_prod / (n - 1)))


def linear_w_state_bound(n_sites: int) -> float:
    """Exact bound for a W-state on the linear spectrum, odd N.

    Uses ``w = 2^(1-N) binom(N-1, (N-1)/2)``, ``alpha_N = 1/sqrt(N)`` and
    ``prod |m_n| = ((N-1)/2)!^2``.
    """
    if n_sites % 2 == 0 or n_sites < 3:
        raise ValueError("needs odd N >= 3")
    h = (n_sites - 1) // 2
    log_w = (1 - n_sites) * np.log(2) + lgamma(n_sites) - 2 * lgamma(h + 1)
    log_prod = log_w - 0.5 * np.log(n_sites) + 2 * lgamma(h + 1)
    return float(np.pi * np.exp(log_prod / (n_sites - 1)))


def speed_report(chain: ChainSpec, target: TargetState, reference: ChainSpec) -> SpeedReport:
    """Maximum coupling and the coupling-product bound for a design.

    The exact bound uses the reference eigenvalue closest to zero, where
    ``prod J~ = w_k |p'(lambda_k)|`` with ``w_k`` the reference weight.
    """
    n = chain.n_sites
    if reference.n_sites != n or target.n_sites != n:
        raise ValueError("chain, reference and target must share one size")
    t0 = target.t0
    j_max = float(np.max(np.abs(chain.couplings))) if n > 1 else 0.0
    ref_es = eigensystem(reference)
    alpha_n = abs(float(target.amplitudes[-1]))
    alpha_ref = abs(complex(evolve(reference, basis_state(n, 1), t0, ref_es)[-1]))
    if n == 1:
        return SpeedReport(0.0, 0.0, 1.0, 0.0, 0.0, 0.0)
    log_p = _log_abs_product(chain.couplings)
    log_ref = _log_abs_product(reference.couplings)
    ident = abs(np.expm1(log_p - (log_ref + np.log(alpha_n / alpha_ref))))
    lam = ref_es.eigenvalues
    k = int(np.argmin(np.abs(lam)))
    log_dp = _log_abs_product(np.delete(lam[k] - lam, k))
    log_bound = np.log(ref_es.first_row_weights[k]) + log_dp + np.log(alpha_n / alpha_ref)
    exact = float(t0 * np.exp(log_bound / (n - 1)))
    return SpeedReport(j_max, j_max * t0, float(np.exp(log_p)), exact, asymptotic_bound(n), float(ident))


def _check_w_state(n_sites: int, target: TargetState | None) -> None:
    if n_sites < 2:
        raise UnsupportedTarget("the gate model needs at least two sites")
    if target is None:
        return
    if target.n_sites != n_sites or not np.allclose(np.abs(target.amplitudes), 1 / np.sqrt(n_sites),
                                                    atol=1e-12, rtol=0):
        raise UnsupportedTarget("the gate model covers only the uniform W-state")


def gate_model_time(n_sites: int, target: TargetState | None = None) -> float:
    """``J_max t0`` for sequential partial swaps building a W-state.

    Step k rotates the excitation from site k into site k+1 with coupling
    ``J_max`` for the time that leaves amplitude ``1/sqrt(N)`` behind; the
    carried amplitude is ``sqrt((N+1-k)/N)`` so the step costs
    ``arccos(1/sqrt(N+1-k))``.
    """
    _check_w_state(n_sites, target)
    k = np.arange(1, n_sites)
    return float(np.sum(np.arccos(1.0 / np.sqrt(n_sites + 1 - k))))


def gate_model_simulation(n_sites: int) -> float:
    """Same quantity found by simulating each two-site swap and root-finding its duration."""
    _check_w_state(n_sites, None)
    pair = np.array([[0.0, 1.0], [1.0, 0.0]])
    carried = 1.0
    total = 0.0
    for _ in range(n_sites - 1):
        keep = 1.0 / np.sqrt(n_sites)

        def left(t, c=carried):
            return abs((expm(-1j * pair * t) @ np.array([c, 0.0]))[0]) - keep

        t = brentq(left, 0.0, np.pi / 2, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        total += t
        carried = abs((expm(-1j * pair * t) @ np.array([carried, 0.0]))[1])
    return float(total)


def _draws(seed: int, eps_index: int, trial: int, size: int) -> np.ndarray:
    """Uniform(-1, 1) draws for one trial, keyed so any trial can be regenerated alone."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, eps_index, trial])))
    return rng.uniform(-1.0, 1.0, size)


def perturbed_fidelities(chain: ChainSpec, target: TargetState, eps: float, trials: int,
                         seed: int = 0, eps_index: int = 0, mode: str = "auto",
                         start: int = 0) -> np.ndarray:
    """Fidelities of ``trials`` perturbed copies (trial indices ``start..start+trials-1``).

    Modes: ``multiplicative`` scales every J and B by ``1 + delta``;
    ``additive`` shifts every J and B by ``delta J_max``; ``auto`` is
    multiplicative for couplings and for fields unless every field is zero,
    in which case fields get the additive shift.  ``delta`` is uniform in
    ``(-eps, eps)``, drawn independently per parameter.
    """
    if mode not in ("auto", "multiplicative", "additive"):
        raise ValueError(f"unknown perturbation mode {mode!r}")
    n = chain.n_sites
    b0, j0 = np.asarray(chain.fields), np.asarray(chain.couplings)
    j_max = float(np.max(np.abs(j0))) if n > 1 else 1.0
    zero_fields = bool(np.all(b0 == 0.0)) or float(np.max(np.abs(b0))) <= 1e-12 * j_max
    delta = eps * np.stack([_draws(seed, eps_index, start + t, 2 * n - 1) for t in range(trials)])
    db, dj = delta[:, :n], delta[:, n:]
    if mode == "additive":
        b, j = b0 + db * j_max, j0 + dj * j_max
    elif mode == "multiplicative":
        b, j = b0 * (1 + db), j0 * (1 + dj)
    else:
        b = b0 + db * j_max if zero_fields else b0 * (1 + db)
        j = j0 * (1 + dj)
    h = np.zeros((trials, n, n))
    idx = np.arange(n)
    h[:, idx, idx] = b
    if n > 1:
        h[:, idx[:-1], idx[1:]] = j
        h[:, idx[1:], idx[:-1]] = j
    lam, vec = np.linalg.eigh(h)
    inp = target.input_site - 1
    coeff = vec[:, inp, :] * np.exp(-1j * lam * target.t0)  # (trials, eigen)
    proj = np.einsum("tse,s->te", vec, target.amplitudes)
    return np.minimum(np.abs(np.sum(coeff * proj, axis=1)), 1.0)


def robustness_sweep(chain: ChainSpec, target: TargetState, eps_grid, trials: int = 10000,
                     seed: int = 0, mode: str = "auto", workers: int = 1,
                     chunk: int = 2000) -> list[RobustnessReport]:
    """Mean, best and spread of the fidelity under random static disorder, per ``eps``.

    Each trial's draws depend only on ``(seed, eps index, trial index)``, so
    results do not depend on ``workers`` or ``chunk`` and a longer run extends
    a shorter one.  Chunks are reduced in index order.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if target.n_sites != chain.n_sites:
        raise ValueError("target and chain sizes differ")
    reports = []
    for e_idx, eps in enumerate(np.asarray(eps_grid, dtype=float).reshape(-1)):
        if eps < 0:
            raise ValueError("perturbation fractions must be non-negative")
        starts = list(range(0, trials, chunk))
        jobs = [(s, min(chunk, trials - s)) for s in starts]

        def run(job, eps=eps, e_idx=e_idx):
            s, count = job
            return perturbed_fidelities(chain, target, eps, count, seed, e_idx, mode, s)

        if workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(run, jobs))
        else:
            parts = [run(job) for job in jobs]
        f = np.concatenate(parts)
        reports.append(RobustnessReport(float(eps), trials, float(f.mean()), float(f.max()),
                                        float(f.std()), seed, mode, float(f.min())))
    return reports
