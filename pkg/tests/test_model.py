import math

import numpy as np
import pytest

from fsra.config import SystemConfig
from fsra.model import (frame_streams, make_indicator, draw_channel, stack_real,
                        synthesize_fixed_symbol_rx, synthesize_frame, unstack_real)


def config(**overrides) -> SystemConfig:
    fields = dict(n_devices=40, n_slots=4, n_antennas_complex=6,
                  activation_prob=0.05, snr_db=0.0, rng_seed=7)
    fields.update(overrides)
    return SystemConfig(**fields)


class TestIndicator:
    def test_no_activations_when_prob_zero(self):
        cfg = config(activation_prob=0.0)
        s = make_indicator(cfg, np.random.default_rng(0))
        assert not s.any()

    def test_forced_single_slot(self):
        cfg = config(activation_prob=1.0, n_slots=1)
        s = make_indicator(cfg, np.random.default_rng(0))
        assert np.array_equal(s, np.ones((cfg.n_devices, 1), dtype=np.int8))

    def test_row_sums_at_most_one(self):
        cfg = config(activation_prob=0.6, n_slots=5)
        rng = np.random.default_rng(3)
        for _ in range(50):
            s = make_indicator(cfg, rng)
            assert set(np.unique(s.sum(axis=1))) <= {0, 1}

    def test_entry_probability(self):
        # empirical P(entry = 1) -> p_a / n_slots within 3 MC sigma
        cfg = config(n_devices=500, n_slots=4, activation_prob=0.05)
        rng = np.random.default_rng(11)
        draws = 500
        total = sum(make_indicator(cfg, rng).sum() for _ in range(draws))
        n_entries = draws * cfg.n_devices * cfg.n_slots   # one million entries
        p0 = cfg.entry_prior
        sigma = math.sqrt(p0 * (1 - p0) / n_entries)
        assert total / n_entries == pytest.approx(p0, abs=3 * sigma)

    def test_activation_fraction(self):
        cfg = config(n_devices=2000, activation_prob=0.3)
        rng = np.random.default_rng(5)
        active = sum((make_indicator(cfg, rng).sum(axis=1) > 0).sum()
                     for _ in range(50))
        n_rows = 50 * cfg.n_devices
        sigma = math.sqrt(0.3 * 0.7 / n_rows)
        assert active / n_rows == pytest.approx(0.3, abs=3 * sigma)


class TestChannel:
    def test_zero_error_std_gives_zero_error(self):
        cfg = config(channel_error_std=0.0)
        _, err = draw_channel(cfg, np.random.default_rng(0), np.random.default_rng(1))
        assert not err.any()

    def test_unit_variance(self):
        cfg = config(n_devices=200, n_antennas_complex=50)
        h, _ = draw_channel(cfg, np.random.default_rng(2), np.random.default_rng(3))
        n = h.size   # 10^4 complex entries per draw; use 10 draws
        samples = [h]
        rng = np.random.default_rng(4)
        for _ in range(9):
            samples.append(draw_channel(cfg, rng, np.random.default_rng(0))[0])
        values = np.concatenate([s.ravel() for s in samples])
        var = np.mean(np.abs(values) ** 2)
        sigma = math.sqrt(2.0 / values.size)   # var of |CN(0,1)|^2 is 1 -> se ~ sqrt(1/n)
        assert var == pytest.approx(1.0, abs=3 * max(sigma, 1.0 / math.sqrt(values.size)))

    def test_error_independent_of_channel(self):
        cfg = config(n_devices=200, n_antennas_complex=50, channel_error_std=0.5)
        rng_h = np.random.default_rng(6)
        rng_e = np.random.default_rng(7)
        hs, es = [], []
        for _ in range(10):
            h, e = draw_channel(cfg, rng_h, rng_e)
            hs.append(h.ravel())
            es.append(e.ravel())
        h = np.concatenate(hs)
        e = np.concatenate(es)
        cov = np.mean(h * np.conj(e)) - np.mean(h) * np.conj(np.mean(e))
        assert abs(cov) < 3.0 / math.sqrt(h.size)


class TestFixedSymbolRx:
    def test_all_silent_noise_free(self):
        cfg = config()
        s = np.zeros((cfg.n_devices, cfg.n_slots), dtype=np.int8)
        h, _ = draw_channel(cfg, np.random.default_rng(0), np.random.default_rng(1))
        y = synthesize_fixed_symbol_rx(s, h, 0.0, np.random.default_rng(2))
        assert not y.any()

    def test_single_active_device_noise_free(self):
        cfg = config(n_devices=1, n_slots=2)
        s = np.array([[1, 0]], dtype=np.int8)
        h, _ = draw_channel(cfg, np.random.default_rng(0), np.random.default_rng(1))
        y = synthesize_fixed_symbol_rx(s, h, 0.0, np.random.default_rng(2))
        np.testing.assert_array_equal(y[:, 0], h[:, 0])
        assert not y[:, 1].any()

    def test_matches_per_antenna_summation(self):
        # matrix product vs the elementwise sum over devices
        cfg = config(n_devices=7, n_antennas_complex=3, n_slots=2)
        rng = np.random.default_rng(9)
        s = make_indicator(cfg.replace(activation_prob=0.8), rng)
        h, _ = draw_channel(cfg, rng, np.random.default_rng(1))
        y = synthesize_fixed_symbol_rx(s, h, 0.0, rng)
        for m in range(cfg.n_antennas_complex):
            for p in range(cfg.n_slots):
                expected = sum(h[m, i] * s[i, p] for i in range(cfg.n_devices))
                assert y[m, p] == pytest.approx(expected)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            synthesize_fixed_symbol_rx(np.zeros((3, 2)), np.zeros((4, 5), dtype=complex),
                                       0.0, np.random.default_rng(0))


class TestStacking:
    def test_pure_imaginary_unit(self):
        y, = stack_real(np.array([[1j]]))
        np.testing.assert_array_equal(y, [[0.0], [1.0]])

    def test_real_input_zero_lower_half(self):
        h = np.random.default_rng(0).standard_normal((3, 4)).astype(complex)
        stacked, = stack_real(h)
        assert not stacked[3:].any()

    def test_unstack_inverts(self):
        rng = np.random.default_rng(1)
        h = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        np.testing.assert_array_equal(unstack_real(stack_real(h)[0]), h)

    def test_stacking_commutes_with_product(self):
        # stacked(H) @ S equals stacking of (H @ S)
        rng = np.random.default_rng(2)
        h = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
        s = (rng.random((5, 4)) < 0.3).astype(float)
        lhs = stack_real(h)[0] @ s
        rhs, = stack_real(h @ s)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


class TestFrame:
    def test_same_seed_bit_identical(self):
        cfg = config(channel_error_std=0.1)
        a = synthesize_frame(cfg, frame_streams(42, 3, 1))
        b = synthesize_frame(cfg, frame_streams(42, 3, 1))
        np.testing.assert_array_equal(a.indicators, b.indicators)
        np.testing.assert_array_equal(a.stacked.y, b.stacked.y)
        np.testing.assert_array_equal(a.stacked.h_csi, b.stacked.h_csi)
        np.testing.assert_array_equal(a.rx_data, b.rx_data)

    def test_distinct_frames_differ(self):
        cfg = config()
        a = synthesize_frame(cfg, frame_streams(42, 0, 0))
        b = synthesize_frame(cfg, frame_streams(42, 1, 0))
        assert not np.array_equal(a.stacked.y, b.stacked.y)

    def test_noise_free_reconstruction(self):
        cfg = config(snr_db=math.inf)
        frame = synthesize_frame(cfg, frame_streams(0, 0, 0))
        np.testing.assert_allclose(frame.rx_fixed,
                                   frame.channel @ frame.indicators,
                                   rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(frame.stacked.y,
                                   frame.stacked.h @ frame.indicators,
                                   rtol=1e-12, atol=1e-12)

    def test_data_symbol_power(self):
        # sample power of active payload symbols -> 1 within 3 MC sigma
        cfg = config(n_devices=600, activation_prob=1.0, n_data_symbols=200)
        frame = synthesize_frame(cfg, frame_streams(13, 0, 0))
        power = np.abs(frame.tx_data) ** 2
        n = power.size   # 1.2e5 symbols
        assert power.mean() == pytest.approx(1.0, abs=3.0 / math.sqrt(n))

    def test_stacked_noise_split(self):
        # each real-stacked noise component carries half the complex variance
        cfg = config(n_devices=1, n_antennas_complex=300, n_slots=2,
                     activation_prob=0.0, snr_db=0.0)
        parts = []
        for f in range(100):
            frame = synthesize_frame(cfg, frame_streams(21, f, 0))
            parts.append(frame.stacked.y.ravel())   # pure noise; 1200 reals/frame
        noise = np.concatenate(parts)
        target = cfg.noise_var_real
        sigma = target * math.sqrt(2.0 / noise.size)
        assert noise.var() == pytest.approx(target, abs=3 * sigma)
        assert abs(noise.mean()) < 3 * math.sqrt(target / noise.size)
