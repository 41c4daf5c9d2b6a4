import math

import numpy as np
import pytest

from fsra.config import SystemConfig
from fsra.model import frame_streams, synthesize_frame
from fsra.mud import (FAIL_ACTIVITY, FAIL_DATA, FALSE_ALARM, SUCCESS,
                      classify_packets, frame_outcomes, mmse_recover, throughput)


def config(**overrides) -> SystemConfig:
    fields = dict(n_devices=12, n_slots=3, n_antennas_complex=6,
                  activation_prob=0.3, snr_db=25.0, rng_seed=3)
    fields.update(overrides)
    return SystemConfig(**fields)


def complex_gaussian(rng, shape, var=1.0):
    return math.sqrt(var / 2) * (rng.standard_normal(shape)
                                 + 1j * rng.standard_normal(shape))


class TestMmseRecover:
    def test_empty_device_set(self):
        out = mmse_recover(np.zeros((4, 5), dtype=complex),
                           np.zeros((4, 0), dtype=complex), 0.1)
        assert out.shape == (0, 5)

    def test_single_device_low_noise_converges(self):
        rng = np.random.default_rng(0)
        h = complex_gaussian(rng, (8, 1))
        x = complex_gaussian(rng, (1, 16))
        previous = None
        for noise_var in (1e-2, 1e-4, 1e-6):
            x_hat = mmse_recover(h @ x, h, noise_var)
            mse = float(np.mean(np.abs(x_hat - x) ** 2))
            if previous is not None:
                assert mse < previous
            previous = mse
        assert previous < 1e-7

    def test_matches_generic_solver_evaluation(self):
        # two-device collision at high SNR against an explicit-inverse oracle
        rng = np.random.default_rng(1)
        noise_var = 10 ** (-2.5)
        for _ in range(10):
            h = complex_gaussian(rng, (6, 2))
            x = complex_gaussian(rng, (2, 10))
            y = h @ x + complex_gaussian(rng, (6, 10), noise_var)
            want = h.conj().T @ np.linalg.inv(h @ h.conj().T
                                              + noise_var * np.eye(6)) @ y
            got = mmse_recover(y, h, noise_var)
            np.testing.assert_allclose(got, want, rtol=1e-10)

    def test_zero_noise_is_total(self):
        rng = np.random.default_rng(2)
        h = complex_gaussian(rng, (4, 1))
        out = mmse_recover(h @ complex_gaussian(rng, (1, 3)), h, 0.0)
        assert np.all(np.isfinite(out))


class TestClassifyPackets:
    def setup_method(self):
        self.s_true = np.array([[1, 0], [0, 1], [0, 0]], dtype=np.int8)

    def test_all_success(self):
        outcomes = classify_packets(self.s_true, self.s_true.copy(),
                                    {0: 1e-6, 1: 1e-6}, 2e-4)
        assert [o.status for o in outcomes] == [SUCCESS, SUCCESS]

    def test_missed_device_fails_whole_slot(self):
        s_hat = self.s_true.copy()
        s_hat[0, 0] = 0     # miss device 0 in slot 0
        s_hat[2, 1] = 1     # false alarm in slot 1
        outcomes = classify_packets(self.s_true, s_hat, {1: 1e-6}, 2e-4)
        by_device = {(o.device, o.slot): o.status for o in outcomes}
        assert by_device[(0, 0)] == FAIL_ACTIVITY
        assert by_device[(1, 1)] == FAIL_ACTIVITY   # FA corrupts the column
        assert by_device[(2, 1)] == FALSE_ALARM

    def test_mse_threshold_separates_data_failures(self):
        outcomes = classify_packets(self.s_true, self.s_true.copy(),
                                    {0: 10 * 2e-4, 1: 1e-6}, 2e-4)
        by_device = {o.device: o.status for o in outcomes}
        assert by_device[0] == FAIL_DATA
        assert by_device[1] == SUCCESS

    def test_activity_takes_precedence_over_data(self):
        s_hat = self.s_true.copy()
        s_hat[2, 0] = 1
        outcomes = classify_packets(self.s_true, s_hat, {0: 1.0}, 2e-4)
        by_device = {(o.device, o.slot): o.status for o in outcomes}
        assert by_device[(0, 0)] == FAIL_ACTIVITY

    def test_infinite_threshold_reduces_to_activity_check(self):
        # any finite recovery error passes, so only activity errors remain
        outcomes = classify_packets(self.s_true, self.s_true.copy(),
                                    {0: 5.0, 1: 123.0}, math.inf)
        assert all(o.status == SUCCESS for o in outcomes)
        s_hat = self.s_true.copy()
        s_hat[0, 0] = 0
        outcomes = classify_packets(self.s_true, s_hat, {0: 5.0, 1: 123.0}, math.inf)
        by_device = {o.device: o.status for o in outcomes}
        assert by_device[0] == FAIL_ACTIVITY
        assert by_device[1] == SUCCESS


class TestThroughput:
    def test_perfect_frames_hit_the_load(self):
        cfg = config(n_devices=300, activation_prob=0.05, n_slots=6)
        rng = np.random.default_rng(5)
        frames = []
        total_packets = 0
        for _ in range(200):
            from fsra.model import make_indicator
            s = make_indicator(cfg, rng)
            packets = int(s.sum())
            total_packets += packets
            frames.append(classify_packets(s, s.copy(),
                                           {int(d): 0.0 for d in np.flatnonzero(s.sum(axis=1))},
                                           cfg.mse_threshold))
        summary = throughput(frames)
        load = cfg.n_devices * cfg.activation_prob
        se = math.sqrt(load / 200)   # Poisson-ish MC noise
        assert summary["throughput"] == pytest.approx(load, abs=4 * se)
        assert summary["fail_activity"] == 0
        assert summary["fail_data"] == 0
        assert summary["throughput"] == total_packets / 200

    def test_accounting_identity(self):
        # successes + activity fails + data fails = true packets;
        # false alarms tracked separately
        cfg = config(snr_db=20.0, mse_threshold=1e-3)
        all_outcomes = []
        true_packets = 0
        fa_count = 0
        from fsra.mpad import detect
        for f in range(20):
            frame = synthesize_frame(cfg, frame_streams(19, f, 0))
            result = detect(frame.stacked.y, frame.stacked.h_csi, cfg)
            outcomes = frame_outcomes(frame, result.s_hat, cfg)
            all_outcomes.append(outcomes)
            true_packets += int(frame.indicators.sum())
            fa_count += int(((result.s_hat == 1) & (frame.indicators == 0)).sum())
        summary = throughput(all_outcomes)
        assert (summary["successes"] + summary["fail_activity"]
                + summary["fail_data"]) == true_packets
        assert summary["false_alarms"] == fa_count
