"""Damped Gauss-Newton for small square or overdetermined nonlinear systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: np.ndarray
    cost: float  # 0.5 * |r|^2
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)
    message: str = ""


class Infeasible(Exception):
    """Raised by a residual function when ``x`` leaves the admissible region."""


def forward_difference(fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                       f0: np.ndarray | None = None, step: float = 1e-7) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    f0 = fun(x) if f0 is None else f0
    jac = np.empty((f0.size, x.size))
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += h
        try:
            jac[:, i] = (fun(xp) - f0) / h
        except Infeasible:
            xp[i] = x[i] - h
            jac[:, i] = (f0 - fun(xp)) / h
    return jac


def damped_newton(
    fun: Callable[[np.ndarray], np.ndarray],
    x0,
    jac: Callable[[np.ndarray], np.ndarray] | None = None,
    *,
    cost_tol: float = 1e-26,
    stop_tol: float | None = None,
    max_iter: int = 200,
    damping: float = 1.0,
    min_step: float = 1e-15,
    fd_step: float = 1e-7,
) -> NewtonResult:
    """Minimise ``0.5 |fun(x)|^2`` by Gauss-Newton steps with backtracking.

    A step is accepted only if it stays feasible (``fun`` does not raise
    :class:`Infeasible`) and strictly lowers the cost, so the recorded cost
    history is non-increasing.  When plain backtracking fails, Levenberg-Marquardt
    damping is tried before giving up.

    ``cost_tol`` decides success; iteration continues until the cost falls
    below ``stop_tol`` (default ``cost_tol``) or no descent step exists, so a
    smaller ``stop_tol`` polishes a converged iterate to round-off.
    ``damping`` is the first trial fraction of each step.
    """
    stop_tol = cost_tol if stop_tol is None else stop_tol
    x = np.array(x0, dtype=float)
    r = fun(x)
    cost = 0.5 * float(r @ r)
    history = [cost]
    for it in range(max_iter):
        if cost <= stop_tol:
            return NewtonResult(x, r, cost, it, cost <= cost_tol, history, "cost below tolerance")
        jm = jac(x) if jac is not None else forward_difference(fun, x, r, fd_step)
        steps = [np.linalg.lstsq(jm, -r, rcond=None)[0]]
        jtj = jm.T @ jm
        g = jm.T @ r
        scale = float(np.trace(jtj)) / max(x.size, 1) or 1.0
        steps += [np.linalg.solve(jtj + mu * scale * np.eye(x.size), -g) for mu in (1e-6, 1e-3, 1e-1, 10.0)]
        accepted = False
        for step in steps:
            t = damping
            while t * np.linalg.norm(step) > min_step * max(1.0, np.linalg.norm(x)):
                trial = x + t * step
                try:
                    rt = fun(trial)
                except Infeasible:
                    t *= 0.5
                    continue
                ct = 0.5 * float(rt @ rt)
                if np.isfinite(ct) and ct < cost:
                    x, r, cost = trial, rt, ct
                    accepted = True
                    break
                t *= 0.5
            if accepted:
                break
        history.append(cost)
        if not accepted:
            return NewtonResult(x, r, cost, it + 1, cost <= cost_tol, history, "no descent step found")
    return NewtonResult(x, r, cost, max_iter, cost <= cost_tol, history, "iteration limit")
