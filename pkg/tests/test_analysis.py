from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainsmith import (
    ChainSpec,
    TargetState,
    UnsupportedTarget,
    christandl_chain,
    design_end_pair,
    design_triple,
    gate_model_simulation,
    gate_model_time,
    lower_bound,
    robustness_sweep,
    speed_report,
)
from chainsmith.analysis import asymptotic_bound, linear_w_state_bound, perturbed_fidelities
from chainsmith.numeric import design_numeric, w_state


class TestSpeed:
    def test_five_site_product(self, eq6_chain, pst5, pair45):
        rep = speed_report(eq6_chain, pair45, pst5)
        assert abs(rep.coupling_product - 12 * np.sqrt(2)) < 1e-10
        assert rep.product_identity_error < 1e-12
        assert rep.lower_bound_exact <= rep.j_max_t0

    def test_w_state(self):
        res = design_numeric(w_state(21))
        rep = speed_report(res.chain, res.target, res.reference)
        assert abs(rep.j_max_t0 - 14.6) <= 0.1 * 14.6
        assert rep.product_identity_error < 1e-8
        assert rep.lower_bound_exact <= rep.j_max_t0

    @given(st.integers(2, 15), st.integers(0, 2**31))
    @settings(max_examples=30, deadline=None)
    def test_max_exceeds_geometric_mean(self, n, seed):
        rng = np.random.default_rng(seed)
        chain = ChainSpec(rng.uniform(-1, 1, n), rng.uniform(0.1, 2, n - 1))
        rep = speed_report(chain, TargetState(np.eye(n)[-1]), christandl_chain(n))
        assert rep.j_max >= np.exp(np.mean(np.log(np.abs(chain.couplings)))) - 1e-12

    def test_end_pair_bound(self):
        res = design_end_pair(11, 0.5)
        rep = speed_report(res.chain, res.target, res.reference)
        assert rep.lower_bound_exact <= rep.j_max_t0 + 1e-12


class TestLowerBound:
    def test_three_site(self):
        assert lower_bound([1, 0, -1], 0.5, 1.0) == pytest.approx(np.pi * np.sqrt(0.5), rel=1e-14)

    def test_needs_zero(self):
        with pytest.raises(ValueError):
            lower_bound([2, 1, -1], 0.5, 1.0)

    @pytest.mark.parametrize("n", [21, 41])
    def test_asymptotic_below_exact(self, n):
        assert asymptotic_bound(n) < linear_w_state_bound(n)

    def test_matches_general_form(self):
        from math import comb

        n = 21
        m = (n + 1 - 2 * np.arange(1, n + 1)) // 2
        w = 2.0 ** (1 - n) * comb(n - 1, (n - 1) // 2)
        assert lower_bound(m, w, 1 / np.sqrt(n)) == pytest.approx(linear_w_state_bound(n), rel=1e-12)


class TestGateModel:
    def test_two(self):
        assert gate_model_time(2) == pytest.approx(np.pi / 4, abs=1e-15)

    def test_three(self):
        assert gate_model_time(3) == pytest.approx(np.arccos(1 / np.sqrt(3)) + np.pi / 4, abs=1e-15)

    @pytest.mark.parametrize("n", [2, 5, 21])
    def test_simulation_oracle(self, n):
        assert abs(gate_model_time(n) - gate_model_simulation(n)) <= 1e-9

    def test_rejects_other_targets(self):
        with pytest.raises(UnsupportedTarget):
            gate_model_time(5, TargetState(np.eye(5)[-1]))


class TestRobustness:
    @pytest.fixture(scope="class")
    @staticmethod
    def design():
        return design_triple(9, 0.0, 1 / np.sqrt(2), 1 / np.sqrt(2))[0]

    def test_zero_eps_is_nominal(self, design):
        (rep,) = robustness_sweep(design.chain, design.target, [0.0], 10, seed=3)
        assert rep.mean_fidelity == pytest.approx(design.fidelity, abs=1e-12)
        assert rep.best_fidelity == pytest.approx(rep.mean_fidelity, abs=1e-12)

    def test_deterministic_and_worker_independent(self, design):
        a = robustness_sweep(design.chain, design.target, [0.01, 0.02], 300, seed=5, chunk=64)
        b = robustness_sweep(design.chain, design.target, [0.01, 0.02], 300, seed=5, workers=4, chunk=50)
        assert a == b

    def test_nested_trials_extend(self, design):
        f_small = perturbed_fidelities(design.chain, design.target, 0.01, 50, seed=2)
        f_large = perturbed_fidelities(design.chain, design.target, 0.01, 120, seed=2)
        assert np.array_equal(f_small, f_large[:50])
        assert f_large.max() >= f_small.max()

    def test_reports_consistent(self, design):
        for rep in robustness_sweep(design.chain, design.target, [0.001, 0.01, 0.05], 500, seed=1):
            assert 0 <= rep.worst_fidelity <= rep.mean_fidelity <= rep.best_fidelity <= 1

    def test_zero_field_chain_gets_additive_field_noise(self):
        chain = christandl_chain(7)
        target = TargetState(np.eye(7)[-1])
        auto = perturbed_fidelities(chain, target, 0.02, 200, seed=0, mode="auto")
        mult = perturbed_fidelities(chain, target, 0.02, 200, seed=0, mode="multiplicative")
        assert auto.mean() < mult.mean()

    def test_bad_mode(self, design):
        with pytest.raises(ValueError):
            perturbed_fidelities(design.chain, design.target, 0.01, 5, mode="nope")
