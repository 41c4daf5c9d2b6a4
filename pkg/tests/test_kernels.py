"""Kernel-level checks: LLR updates against probability-domain oracles."""

import math

import numpy as np
import pytest

from fsra.mpad import DEFAULT_CN_LOG_CLIP, DEFAULT_LLR_CLIP, DEFAULT_VAR_FLOOR, harden

from _oracles import (cn_prob_oracle, output_prob_oracle, sn_prob_oracle,
                      vn_to_cn_prob_oracle, vn_to_sn_prob_oracle)

BIG_CLIP = 1e9   # disables the clip so the pure update equation is compared
N_ANT, N_DEV, N_SLOT = 5, 4, 3


def random_state(rng):
    llr = rng.uniform(-20.0, 20.0, size=(N_ANT, N_DEV, N_SLOT))
    y = rng.normal(0.0, 1.5, size=(N_ANT, N_SLOT))
    h = rng.normal(0.0, 1.0, size=(N_ANT, N_DEV))
    noise_var = rng.uniform(0.5, 2.0)
    return llr, y, h, noise_var


class TestSnUpdate:
    def test_single_device_unit_instance(self, kernels):
        # no interferers: u = 0, v = noise -> (2*1*1 - 1) / 2 = 0.5
        llr_vs = np.zeros((1, 1, 1))
        out = kernels.sn_update(llr_vs, np.ones((1, 1)), np.ones((1, 1)),
                                1.0, DEFAULT_VAR_FLOOR, DEFAULT_LLR_CLIP)
        assert out[0, 0, 0] == pytest.approx(0.5, rel=1e-15)

    def test_matches_probability_oracle(self, kernels):
        rng = np.random.default_rng(100)
        for _ in range(25):
            llr_vs, y, h, noise_var = random_state(rng)
            got = kernels.sn_update(llr_vs, y, h, noise_var, DEFAULT_VAR_FLOOR, BIG_CLIP)
            want = sn_prob_oracle(llr_vs, y, h, noise_var)
            np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-12)

    def test_output_clipped(self, kernels):
        rng = np.random.default_rng(101)
        llr_vs, y, h, _ = random_state(rng)
        out = kernels.sn_update(llr_vs, y, h, 1e-9, DEFAULT_VAR_FLOOR, DEFAULT_LLR_CLIP)
        assert np.all(np.abs(out) <= DEFAULT_LLR_CLIP)
        assert np.all(np.isfinite(out))

    def test_variance_floor_keeps_kernel_total(self, kernels):
        # saturated incoming messages + zero noise drive the variance to zero
        llr_vs = np.full((2, 3, 1), 50.0)
        y = np.ones((2, 1))
        h = np.ones((2, 3))
        out = kernels.sn_update(llr_vs, y, h, 0.0, DEFAULT_VAR_FLOOR, DEFAULT_LLR_CLIP)
        assert np.all(np.isfinite(out))


class TestVnToCnUpdate:
    def test_prior_only(self, kernels):
        # all sample messages zero, prior p0 = 0.05/4 = 0.0125
        prior = math.log(0.0125 / 0.9875)
        out = kernels.vn_to_cn_update(np.zeros((N_ANT, N_DEV, N_SLOT)),
                                      prior, DEFAULT_LLR_CLIP)
        np.testing.assert_allclose(out, prior, rtol=1e-12)
        assert out[0, 0] == pytest.approx(-4.3694, abs=1e-4)

    def test_matches_probability_oracle(self, kernels):
        rng = np.random.default_rng(102)
        for _ in range(25):
            llr_s = rng.uniform(-20.0, 20.0, size=(N_ANT, N_DEV, N_SLOT))
            p0 = rng.uniform(0.001, 0.5)
            prior = math.log(p0 / (1.0 - p0))
            got = kernels.vn_to_cn_update(llr_s, prior, BIG_CLIP)
            want = vn_to_cn_prob_oracle(llr_s, p0)
            np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-12)


class TestCnUpdate:
    def test_single_slot_is_prior_log_odds(self, kernels):
        # empty sum: the message reduces to log(p_a / (1 - p_a))
        out = kernels.cn_update(np.zeros((3, 1)), math.log(0.5),
                                DEFAULT_CN_LOG_CLIP, DEFAULT_LLR_CLIP)
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_certain_other_slot_forbids_this_one(self, kernels):
        llr_vc = np.array([[0.0, DEFAULT_LLR_CLIP]])
        out = kernels.cn_update(llr_vc, math.log(0.5),
                                DEFAULT_CN_LOG_CLIP, DEFAULT_LLR_CLIP)
        assert out[0, 0] == pytest.approx(-DEFAULT_LLR_CLIP)

    def test_matches_probability_oracle(self, kernels):
        rng = np.random.default_rng(103)
        for _ in range(25):
            llr_vc = rng.uniform(-20.0, 10.0, size=(N_DEV, N_SLOT))
            act_prob = rng.uniform(0.05, 0.95)
            got = kernels.cn_update(llr_vc, math.log(act_prob),
                                    DEFAULT_CN_LOG_CLIP, BIG_CLIP)
            want = cn_prob_oracle(llr_vc, act_prob)
            np.testing.assert_allclose(got, want, rtol=1e-6, atol=1e-9)

    def test_negative_and_decreasing_under_one_confident_slot(self, kernels):
        # one strongly positive incoming message suppresses the other slots,
        # monotonically in its confidence
        rng = np.random.default_rng(104)
        for _ in range(20):
            base = rng.uniform(-30.0, 0.0, size=(1, 4))
            previous = None
            for confident in np.linspace(5.0, 45.0, 9):
                llr_vc = base.copy()
                llr_vc[0, 2] = confident
                out = kernels.cn_update(llr_vc, math.log(0.3),
                                        DEFAULT_CN_LOG_CLIP, BIG_CLIP)
                others = [out[0, p] for p in range(4) if p != 2]
                assert all(v < 0.0 for v in others)
                if previous is not None:
                    assert all(n < p for n, p in zip(others, previous))
                previous = others


class TestVnToSnUpdate:
    def test_single_antenna_neutral(self, kernels):
        # empty leave-one-out sum, zero constraint message, p0 = 0.5
        llr_s = np.array([[[3.0]]])
        out = kernels.vn_to_sn_update(llr_s, np.zeros((1, 1)), 0.0, DEFAULT_LLR_CLIP)
        assert out[0, 0, 0] == pytest.approx(0.0)

    def test_matches_probability_oracle(self, kernels):
        rng = np.random.default_rng(105)
        for _ in range(25):
            llr_s = rng.uniform(-20.0, 20.0, size=(N_ANT, N_DEV, N_SLOT))
            llr_c = rng.uniform(-20.0, 20.0, size=(N_DEV, N_SLOT))
            p0 = rng.uniform(0.001, 0.5)
            prior = math.log(p0 / (1.0 - p0))
            got = kernels.vn_to_sn_update(llr_s, llr_c, prior, BIG_CLIP)
            want = vn_to_sn_prob_oracle(llr_s, llr_c, p0)
            np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-12)


class TestOutput:
    def test_neutral_inputs_give_zero(self, kernels):
        out = kernels.output_llr(np.zeros((N_ANT, N_DEV, N_SLOT)),
                                 np.zeros((N_DEV, N_SLOT)), 0.0)
        np.testing.assert_array_equal(out, 0.0)

    def test_matches_probability_oracle(self, kernels):
        rng = np.random.default_rng(106)
        for _ in range(25):
            llr_s = rng.uniform(-20.0, 20.0, size=(N_ANT, N_DEV, N_SLOT))
            llr_c = rng.uniform(-20.0, 20.0, size=(N_DEV, N_SLOT))
            p0 = rng.uniform(0.001, 0.5)
            got = kernels.output_llr(llr_s, llr_c, math.log(p0 / (1.0 - p0)))
            want = output_prob_oracle(llr_s, llr_c, p0)
            np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-12)

    def test_sigmoid_maps_llr_to_probability(self, kernels):
        # posterior probability of the LLR output is its logistic transform;
        # check against the oracle's probability-domain value
        rng = np.random.default_rng(107)
        llr_s = rng.uniform(-5.0, 5.0, size=(N_ANT, N_DEV, N_SLOT))
        llr_c = rng.uniform(-5.0, 5.0, size=(N_DEV, N_SLOT))
        p0 = 0.2
        llr = kernels.output_llr(llr_s, llr_c, math.log(p0 / (1.0 - p0)))
        prob = 1.0 / (1.0 + np.exp(-llr))
        want = 1.0 / (1.0 + np.exp(-output_prob_oracle(llr_s, llr_c, p0)))
        np.testing.assert_allclose(prob, want, rtol=1e-9)


class TestHarden:
    def test_zero_is_active(self):
        assert harden(np.array([0.0]))[0] == 1

    def test_negative_is_inactive(self):
        assert harden(np.array([-0.1]))[0] == 0

    def test_saturated_positive(self):
        assert harden(np.array([DEFAULT_LLR_CLIP]))[0] == 1


class TestBoundedness:
    def test_no_nan_inf_reachable(self, kernels):
        # adversarial but finite inputs; every kernel output must stay clipped
        rng = np.random.default_rng(108)
        for _ in range(10):
            llr_vs = rng.uniform(-50.0, 50.0, size=(N_ANT, N_DEV, N_SLOT))
            y = rng.normal(0.0, 100.0, size=(N_ANT, N_SLOT))
            h = rng.normal(0.0, 10.0, size=(N_ANT, N_DEV))
            llr_s = kernels.sn_update(llr_vs, y, h, 0.0, DEFAULT_VAR_FLOOR,
                                      DEFAULT_LLR_CLIP)
            llr_vc = kernels.vn_to_cn_update(llr_s, -50.0, DEFAULT_LLR_CLIP)
            llr_c = kernels.cn_update(llr_vc, math.log(0.999), DEFAULT_CN_LOG_CLIP,
                                      DEFAULT_LLR_CLIP)
            llr_vs2 = kernels.vn_to_sn_update(llr_s, llr_c, 50.0, DEFAULT_LLR_CLIP)
            for arr in (llr_s, llr_vc, llr_c, llr_vs2):
                assert np.all(np.isfinite(arr))
                assert np.all(np.abs(arr) <= DEFAULT_LLR_CLIP)
