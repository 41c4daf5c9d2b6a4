"""Scenario configuration for the random-access simulator.

All scenario parameters live in one flat :class:`SystemConfig`. Config files
are flat YAML mappings whose keys are exactly the field names below; unknown
keys are rejected so that typos never silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import yaml


class ConfigError(ValueError):
    """Raised for invalid scenario parameters or malformed config files."""


@dataclass(frozen=True)
class SystemConfig:
    n_devices: int                     # devices contending for access
    n_slots: int                       # slots per RA frame
    n_antennas_complex: int            # complex-valued receive antennas
    activation_prob: float             # per-device activation probability, in [0, 1]
    snr_db: float                      # SNR of the complex model, unit mean rx power
    channel_error_std: float = 0.0     # std of the CSI error (complex, per entry)
    iterations: int = 10               # detector iterations
    mse_threshold: float = 2e-4        # per-packet recovery MSE acceptance threshold
    rng_seed: int = 0                  # master seed; all substreams derive from it
    n_data_symbols: int = 10           # payload symbols per packet

    def __post_init__(self) -> None:
        for name in ("n_devices", "n_slots", "n_antennas_complex", "iterations"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.n_data_symbols, int) or self.n_data_symbols < 1:
            raise ConfigError(f"n_data_symbols must be a positive integer, got {self.n_data_symbols!r}")
        if not 0.0 <= self.activation_prob <= 1.0:
            raise ConfigError(f"activation_prob must be in [0, 1], got {self.activation_prob!r}")
        if self.channel_error_std < 0.0:
            raise ConfigError(f"channel_error_std must be >= 0, got {self.channel_error_std!r}")
        if self.mse_threshold <= 0.0:
            raise ConfigError(f"mse_threshold must be > 0, got {self.mse_threshold!r}")
        if not isinstance(self.rng_seed, int):
            raise ConfigError(f"rng_seed must be an integer, got {self.rng_seed!r}")

    @property
    def n_antennas_real(self) -> int:
        """Rows of the real-stacked model: twice the complex antenna count."""
        return 2 * self.n_antennas_complex

    @property
    def entry_prior(self) -> float:
        """Prior probability that one indicator entry equals 1."""
        return self.activation_prob / self.n_slots

    @property
    def noise_var_complex(self) -> float:
        """Complex noise variance for unit mean received power."""
        return 10.0 ** (-self.snr_db / 10.0)

    @property
    def noise_var_real(self) -> float:
        """Noise variance of each real-stacked component (half the complex one)."""
        return self.noise_var_complex / 2.0

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SystemConfig)}
_INT_FIELDS = {"n_devices", "n_slots", "n_antennas_complex", "iterations", "rng_seed", "n_data_symbols"}
_FLOAT_FIELDS = {"activation_prob", "snr_db", "channel_error_std", "mse_threshold"}


def _coerce(key: str, value) -> int | float:
    if isinstance(value, bool):
        raise ConfigError(f"config key {key!r} must be numeric, got {value!r}")
    if key in _INT_FIELDS:
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(f"config key {key!r} must be an integer, got {value!r}")
    if key in _FLOAT_FIELDS:
        if isinstance(value, (int, float)):
            return float(value)
        raise ConfigError(f"config key {key!r} must be a real number, got {value!r}")
    raise ConfigError(f"unknown config key {key!r}")


def load_config(path: str | Path) -> SystemConfig:
    """Load a scenario file (flat YAML mapping of SystemConfig fields)."""
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse config file {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must contain a flat key/value mapping")
    unknown = sorted(set(raw) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
    fields = {key: _coerce(key, value) for key, value in raw.items()}
    return SystemConfig(**fields)


def save_config(config: SystemConfig, path: str | Path) -> None:
    """Write a scenario file readable by :func:`load_config`."""
    data = dataclasses.asdict(config)
    Path(path).write_text(yaml.safe_dump(data, default_flow_style=False, sort_keys=False))


def sweep_value(config: SystemConfig, name: str, value) -> SystemConfig:
    """Return a copy of ``config`` with one swept field replaced."""
    if name not in _FIELD_TYPES:
        raise ConfigError(f"cannot sweep unknown config field {name!r}")
    return config.replace(**{name: _coerce(name, value)})


def snr_db_to_noise_var(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 10.0)


def prior_llr(entry_prior: float) -> float:
    """Log-odds of the entry prior; infinite at the endpoints (clipped later)."""
    if entry_prior <= 0.0:
        return -math.inf
    if entry_prior >= 1.0:
        return math.inf
    return math.log(entry_prior / (1.0 - entry_prior))
