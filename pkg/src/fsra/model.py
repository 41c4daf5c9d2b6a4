"""Synthesis of random-access frames.

One frame: every device activates independently with probability
``activation_prob`` and, when active, transmits in one uniformly chosen slot.
The base station observes the superposition of a known unit symbol through an
i.i.d. CN(0,1) channel, plus CN(0, sigma_n^2) noise, and a per-slot block of
Gaussian data symbols. Detection runs on the real-stacked form of the complex
model (real parts on top, imaginary parts below), which doubles the antenna
dimension but leaves the indicator matrix untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig


@dataclass(frozen=True)
class FrameStreams:
    """Independent random substreams for the components of one frame."""

    activity: np.random.Generator
    channel: np.random.Generator
    channel_error: np.random.Generator
    noise: np.random.Generator
    data: np.random.Generator


def frame_streams(seed: int, frame_index: int = 0, point_index: int = 0) -> FrameStreams:
    """Spawn the per-component generators for one frame.

    Streams are keyed by (seed, point, frame) so that frames can be produced
    concurrently and any single frame can be regenerated in isolation.
    """
    root = np.random.SeedSequence(seed, spawn_key=(point_index, frame_index))
    children = root.spawn(5)
    return FrameStreams(*(np.random.default_rng(c) for c in children))


@dataclass(frozen=True)
class StackedReal:
    """Real-stacked views used by the activity detector."""

    y: np.ndarray       # (2*M*, n_slots) received fixed-symbol matrix
    h: np.ndarray       # (2*M*, n_devices) true channel
    h_csi: np.ndarray   # (2*M*, n_devices) channel as known to the receiver


@dataclass(frozen=True)
class Frame:
    config: SystemConfig
    indicators: np.ndarray        # (n_devices, n_slots) binary, row sums <= 1
    channel: np.ndarray           # (M*, n_devices) complex, CN(0,1) entries
    channel_error: np.ndarray     # (M*, n_devices) complex, CN(0, sigma_e^2)
    rx_fixed: np.ndarray          # (M*, n_slots) complex rx of the unit symbol
    tx_data: np.ndarray           # (n_devices, n_data_symbols) complex payloads
    rx_data: np.ndarray           # (n_slots, M*, n_data_symbols) complex
    stacked: StackedReal

    @property
    def csi(self) -> np.ndarray:
        """Receiver-side channel knowledge (complex)."""
        return self.channel + self.channel_error


def make_indicator(config: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw the device-slot indicator matrix.

    Each device is active with probability ``activation_prob``; an active
    device occupies exactly one uniformly chosen slot, so every row has at
    most a single 1.
    """
    n_dev, n_slots = config.n_devices, config.n_slots
    active = rng.random(n_dev) < config.activation_prob
    slots = rng.integers(0, n_slots, size=n_dev)
    indicators = np.zeros((n_dev, n_slots), dtype=np.int8)
    indicators[active, slots[active]] = 1
    return indicators


def _complex_gaussian(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    """Circular complex Gaussian with per-entry variance ``var``."""
    if var == 0.0:
        return np.zeros(shape, dtype=np.complex128)
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_channel(config: SystemConfig, rng: np.random.Generator,
                 error_rng: np.random.Generator | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Draw the true channel and an independent CSI error matrix."""
    shape = (config.n_antennas_complex, config.n_devices)
    channel = _complex_gaussian(rng, shape, 1.0)
    err_var = config.channel_error_std ** 2
    error = _complex_gaussian(error_rng if error_rng is not None else rng, shape, err_var)
    return channel, error


def synthesize_fixed_symbol_rx(indicators: np.ndarray, channel: np.ndarray,
                               noise_var: float, rng: np.random.Generator) -> np.ndarray:
    """Received complex matrix for the unit symbol: Y = H S + N."""
    n_ant, n_dev = channel.shape
    if indicators.shape[0] != n_dev:
        raise ValueError(
            f"indicator rows ({indicators.shape[0]}) must match channel columns ({n_dev})")
    noise = _complex_gaussian(rng, (n_ant, indicators.shape[1]), noise_var)
    return channel @ indicators + noise


def stack_real(*matrices: np.ndarray) -> tuple[np.ndarray, ...]:
    """Stack complex matrices into real ones: real parts above imaginary parts."""
    return tuple(np.concatenate([m.real, m.imag], axis=0) for m in matrices)


def unstack_real(matrix: np.ndarray) -> np.ndarray:
    """Inverse of :func:`stack_real` for a single matrix."""
    if matrix.shape[0] % 2:
        raise ValueError("stacked matrix must have an even number of rows")
    half = matrix.shape[0] // 2
    return matrix[:half] + 1j * matrix[half:]


def synthesize_frame(config: SystemConfig, streams: FrameStreams) -> Frame:
    """Generate one complete frame from explicit substreams."""
    indicators = make_indicator(config, streams.activity)
    channel, channel_error = draw_channel(config, streams.channel, streams.channel_error)
    noise_var = config.noise_var_complex
    rx_fixed = synthesize_fixed_symbol_rx(indicators, channel, noise_var, streams.noise)

    # Unit-power complex Gaussian payloads; inactive devices keep zero rows.
    tx_data = _complex_gaussian(streams.data, (config.n_devices, config.n_data_symbols), 1.0)
    tx_data[indicators.sum(axis=1) == 0] = 0.0
    rx_data = np.empty((config.n_slots, config.n_antennas_complex, config.n_data_symbols),
                       dtype=np.complex128)
    for slot in range(config.n_slots):
        sent = indicators[:, slot].astype(np.float64)[:, None] * tx_data
        noise = _complex_gaussian(streams.noise,
                                  (config.n_antennas_complex, config.n_data_symbols), noise_var)
        rx_data[slot] = channel @ sent + noise

    y, h, h_csi = stack_real(rx_fixed, channel, channel + channel_error)
    return Frame(config=config, indicators=indicators, channel=channel,
                 channel_error=channel_error, rx_fixed=rx_fixed, tx_data=tx_data,
                 rx_data=rx_data, stacked=StackedReal(y=y, h=h, h_csi=h_csi))
