from __future__ import annotations

from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainsmith import (
    ChainSpec,
    InvalidSpectrum,
    InvalidWeights,
    NumericalBreakdown,
    SpectralData,
    chain_from_v1,
    eigensystem,
    lanczos_reconstruct,
    persymmetric_weights,
)
from chainsmith.design import ReferenceFrame
from chainsmith.pst import PstSpectrum

from .conftest import EQ6_COUPLINGS, EQ6_FIELDS, random_chain


class TestSpectralData:
    def test_rejects_zero_weight(self):
        with pytest.raises(InvalidWeights):
            SpectralData([1.0, -1.0], [1.0, 0.0])

    def test_rejects_bad_sum(self):
        with pytest.raises(InvalidWeights):
            SpectralData([1.0, -1.0], [0.5, 0.6])

    def test_rejects_unsorted(self):
        with pytest.raises(InvalidSpectrum):
            SpectralData([-1.0, 1.0], [0.5, 0.5])


class TestLanczos:
    def test_binomial_weights_give_pst(self):
        w = np.array([comb(4, k) for k in range(5)]) / 16
        chain = lanczos_reconstruct(SpectralData([4.0, 2, 0, -2, -4], w))
        assert np.allclose(chain.fields, 0, atol=1e-10)
        assert np.allclose(chain.couplings, [2, np.sqrt(6), np.sqrt(6), 2], atol=1e-10)

    def test_single_site(self):
        chain = lanczos_reconstruct(SpectralData([0.3], [1.0]))
        assert chain.fields.tolist() == [0.3]
        assert chain.couplings.size == 0

    @given(st.integers(2, 30), st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, n, seed):
        chain = random_chain(np.random.default_rng(seed), n)
        es = eigensystem(chain)
        rebuilt = lanczos_reconstruct(SpectralData(es.eigenvalues, es.first_row_weights))
        scale = max(np.max(np.abs(chain.fields)), np.max(np.abs(chain.couplings)))
        assert np.max(np.abs(rebuilt.fields - chain.fields)) <= 1e-8 * scale
        assert np.max(np.abs(rebuilt.couplings - np.abs(chain.couplings))) <= 1e-8 * scale
        assert np.all(rebuilt.couplings > 0)

    @given(st.integers(2, 40), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_isospectral_and_weight_fidelity(self, n, seed):
        rng = np.random.default_rng(seed)
        lam = np.sort(rng.uniform(-5, 5, n))[::-1]
        if np.min(-np.diff(lam)) < 1e-3:
            lam = np.linspace(5, -5, n)
        w = rng.uniform(0.1, 1, n)
        w /= w.sum()
        es = eigensystem(lanczos_reconstruct(SpectralData(lam, w)))
        assert np.allclose(es.eigenvalues, lam, atol=1e-8)
        assert np.allclose(es.first_row_weights, w, atol=1e-8)

    def test_breakdown(self):
        # numerically negligible weights on a spectrum make the recurrence collapse
        w = np.array([0.5, 1e-300, 0.5])
        with pytest.raises((NumericalBreakdown, InvalidWeights)):
            lanczos_reconstruct(SpectralData([1.0, 1.0 - 1e-15, -1.0], w / w.sum()))


class TestPersymmetric:
    def test_two(self):
        assert np.allclose(persymmetric_weights([1.0, -1.0]).weights, [0.5, 0.5])

    @pytest.mark.parametrize("n", [3, 6, 11, 21, 40])
    def test_linear_spectrum_is_binomial(self, n):
        lam = n + 1 - 2 * np.arange(1, n + 1.0)
        expected = np.array([comb(n - 1, k) for k in range(n)], dtype=float) * 2.0 ** (1 - n)
        assert np.allclose(persymmetric_weights(lam).weights, expected, rtol=1e-10, atol=0)

    def test_five_site_pst(self):
        chain = lanczos_reconstruct(persymmetric_weights([4.0, 2, 0, -2, -4]))
        assert np.allclose(chain.couplings, [2, np.sqrt(6), np.sqrt(6), 2], atol=1e-12)

    @given(st.integers(2, 25), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_mirror_symmetric_result(self, n, seed):
        lam = np.sort(np.random.default_rng(seed).choice(np.arange(-60, 60), n, replace=False))[::-1] * 0.5
        chain = lanczos_reconstruct(persymmetric_weights(lam))
        assert chain.is_mirror_symmetric(tol=1e-8 * max(1, np.max(np.abs(lam))))


class TestChainFromV1:
    def test_alpha_zero_returns_pst(self):
        frame = ReferenceFrame(PstSpectrum.linear(7))
        chain = chain_from_v1(frame.l1**2, frame.eigenvalues)
        assert np.allclose(chain.couplings, frame.chain.couplings, atol=1e-12)

    def test_five_site_rank_one_correction(self):
        frame = ReferenceFrame(PstSpectrum(np.array([2, 1, 0, -1, -2])))
        b2 = -np.sqrt((6 - np.sqrt(10)) / 13)
        v1 = frame.l1**2 + b2 * frame.l1 * frame.vectors[:, 1]
        chain = chain_from_v1(v1, frame.eigenvalues)
        assert np.allclose(np.abs(chain.fields), np.abs(EQ6_FIELDS), atol=1e-8)
        assert np.allclose(chain.couplings, np.abs(EQ6_COUPLINGS), atol=1e-8)
        # B_1 = B~_1 + J~_1 beta_2 for a rank-one correction of |v~_1>
        assert abs(chain.fields[0] - (frame.chain.fields[0] + frame.chain.couplings[0] * b2)) < 1e-12

    def test_negative_entry(self):
        with pytest.raises(InvalidWeights):
            chain_from_v1([0.6, -0.1, 0.5], [1.0, 0.0, -1.0])

    def test_bad_sum(self):
        with pytest.raises(InvalidWeights):
            chain_from_v1([0.6, 0.1, 0.5], [1.0, 0.0, -1.0])

    def test_distinct_data_distinct_chains(self):
        lam = np.array([3.0, 1.0, -1.0, -3.0])
        a = chain_from_v1([0.25, 0.25, 0.25, 0.25], lam)
        b = chain_from_v1([0.3, 0.2, 0.25, 0.25], lam)
        assert np.max(np.abs(a.matrix() - b.matrix())) > 1e-3

    def test_accepts_chainspec_output(self):
        assert isinstance(chain_from_v1([0.5, 0.5], [1.0, -1.0]), ChainSpec)
