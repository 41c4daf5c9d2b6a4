import math

import numpy as np
import pytest

from fsra.config import SystemConfig
from fsra.model import frame_streams, synthesize_frame
from fsra.mpad import (DetectorParams, available_backends, detect, detect_frames,
                       make_unit_weights)


def config(**overrides) -> SystemConfig:
    fields = dict(n_devices=3, n_slots=2, n_antennas_complex=4,
                  activation_prob=0.2, snr_db=10.0, iterations=10, rng_seed=5)
    fields.update(overrides)
    return SystemConfig(**fields)


class TestDetect:
    def test_single_confident_device(self):
        # noise-free, one device, one slot: decision 1 with a large LLR
        cfg = config(n_devices=1, n_slots=1, activation_prob=1.0, snr_db=math.inf)
        frame = synthesize_frame(cfg, frame_streams(1, 0, 0))
        assert frame.indicators[0, 0] == 1
        result = detect(frame.stacked.y, frame.stacked.h_csi, cfg)
        assert result.s_hat[0, 0] == 1
        assert result.llr[0, 0] > 10.0

    def test_noise_free_recovery_rate(self):
        # small instances recover the exact indicator matrix almost surely
        cfg = config(snr_db=math.inf)
        hits = 0
        for f in range(200):
            frame = synthesize_frame(cfg, frame_streams(9, f, 0))
            result = detect(frame.stacked.y, frame.stacked.h_csi, cfg)
            hits += int(np.array_equal(result.s_hat, frame.indicators))
        assert hits >= 198

    def test_decision_matches_llr_sign(self):
        cfg = config(snr_db=0.0)
        frame = synthesize_frame(cfg, frame_streams(2, 0, 0))
        result = detect(frame.stacked.y, frame.stacked.h_csi, cfg)
        np.testing.assert_array_equal(result.s_hat, (result.llr >= 0).astype(np.int8))

    def test_rejects_nonfinite_input(self):
        cfg = config()
        frame = synthesize_frame(cfg, frame_streams(0, 0, 0))
        y = frame.stacked.y.copy()
        y[0, 0] = np.nan
        with pytest.raises(ValueError, match="finite"):
            detect(y, frame.stacked.h_csi, cfg)

    def test_rejects_wrong_shapes(self):
        cfg = config()
        frame = synthesize_frame(cfg, frame_streams(0, 0, 0))
        with pytest.raises(ValueError, match="shape"):
            detect(frame.stacked.y[:-1], frame.stacked.h_csi, cfg)

    def test_weight_dimension_mismatch(self):
        cfg = config()
        frame = synthesize_frame(cfg, frame_streams(0, 0, 0))
        wrong = make_unit_weights(cfg.n_devices + 1, cfg.n_slots,
                                  cfg.n_antennas_real, cfg.iterations)
        with pytest.raises(ValueError, match="N_s"):
            detect(frame.stacked.y, frame.stacked.h_csi, cfg, weights=wrong)

    def test_iteration_snapshots(self):
        cfg = config()
        frame = synthesize_frame(cfg, frame_streams(3, 0, 0))
        result = detect(frame.stacked.y, frame.stacked.h_csi, cfg,
                        collect_iterations=True)
        assert result.iteration_llrs.shape == (cfg.iterations, cfg.n_devices,
                                               cfg.n_slots)
        np.testing.assert_allclose(result.iteration_llrs[-1], result.llr,
                                   rtol=1e-12, atol=1e-12)

    def test_message_state_bounds(self):
        cfg = config(snr_db=25.0)
        frame = synthesize_frame(cfg, frame_streams(4, 0, 0))
        params = DetectorParams(iterations=cfg.iterations)
        result = detect(frame.stacked.y, frame.stacked.h_csi, cfg, keep_state=True)
        state = result.state
        for arr in (state.llr_sn_to_vn, state.llr_vn_to_cn,
                    state.llr_cn_to_vn, state.llr_vn_to_sn):
            assert np.all(np.abs(arr) <= params.llr_clip)

    def test_zero_activation_probability(self):
        # degenerate prior: everything decided inactive, no NaN anywhere
        cfg = config(activation_prob=0.0)
        frame = synthesize_frame(cfg, frame_streams(6, 0, 0))
        result = detect(frame.stacked.y, frame.stacked.h_csi, cfg)
        assert not result.s_hat.any()
        assert np.all(np.isfinite(result.llr))


class TestBackendParity:
    @pytest.mark.skipif(len(available_backends()) < 2,
                        reason="compiled backend not built")
    def test_backends_agree(self):
        cfg = config(n_devices=12, n_slots=3, n_antennas_complex=6, snr_db=5.0)
        for f in range(20):
            frame = synthesize_frame(cfg, frame_streams(11, f, 0))
            r_c = detect(frame.stacked.y, frame.stacked.h_csi, cfg, backend="compiled")
            r_p = detect(frame.stacked.y, frame.stacked.h_csi, cfg, backend="python")
            np.testing.assert_allclose(r_c.llr, r_p.llr, rtol=1e-10, atol=1e-10)
            np.testing.assert_array_equal(r_c.s_hat, r_p.s_hat)


class TestDetectFrames:
    def test_matches_single_frame_detect(self):
        cfg = config(n_devices=8, n_slots=3, snr_db=0.0)
        frames = [synthesize_frame(cfg, frame_streams(7, f, 0)) for f in range(9)]
        ys = np.stack([f.stacked.y for f in frames])
        hs = np.stack([f.stacked.h_csi for f in frames])
        for backend in available_backends():
            s_hat, llr = detect_frames(ys, hs, cfg, backend=backend, batch=4)
            for i, frame in enumerate(frames):
                single = detect(frame.stacked.y, frame.stacked.h_csi, cfg,
                                backend=backend)
                np.testing.assert_allclose(llr[i], single.llr, rtol=1e-10, atol=1e-12)
                np.testing.assert_array_equal(s_hat[i], single.s_hat)
