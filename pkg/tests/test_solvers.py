from __future__ import annotations

import numpy as np

from chainsmith.design import ReferenceFrame, continuation, free_directions, pinned_base
from chainsmith.solvers import Infeasible, damped_newton, forward_difference


def test_forward_difference_linear():
    a = np.array([[1.0, 2.0], [3.0, -1.0], [0.5, 0.0]])
    jac = forward_difference(lambda x: a @ x, np.array([0.3, -0.2]))
    assert np.allclose(jac, a, atol=1e-6)


def test_newton_square_root():
    sol = damped_newton(lambda x: np.array([x[0] ** 2 - 2.0]), [1.0])
    assert sol.converged
    assert abs(sol.x[0] - np.sqrt(2)) < 1e-12


def test_history_non_increasing():
    def fun(x):
        return np.array([10 * (x[1] - x[0] ** 2), 1 - x[0]])

    sol = damped_newton(fun, [-1.2, 1.0], max_iter=200)
    assert sol.converged
    assert all(b <= a for a, b in zip(sol.history, sol.history[1:]))


def test_respects_infeasible_region():
    def fun(x):
        if x[0] <= 0:
            raise Infeasible
        return np.array([np.log(x[0]) - 1.0])

    sol = damped_newton(fun, [5.0])
    assert sol.converged
    assert abs(sol.x[0] - np.e) < 1e-10


def test_continuation_reaches_end_pair():
    n = 9
    frame = ReferenceFrame.linear(n)
    start = np.zeros(n)
    start[-1] = 1.0
    end = np.zeros(n)
    end[[0, -1]] = [0.6, 0.8]
    free = list(range(2, n))
    x, target = continuation(frame, [start, end], np.zeros(n - 2), free)
    # the end-pair design has every interior beta entry zero
    assert np.allclose(x, 0, atol=1e-10)
    assert np.allclose(target.amplitudes, end)
    w = frame.weights(pinned_base(n, 0.6) + free_directions(n, free) @ x)
    assert np.all(w > 0)
