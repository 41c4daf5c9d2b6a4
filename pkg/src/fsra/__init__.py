"""Fixed-symbol aided grant-free random access: simulation and detection."""

__version__ = "0.1.0"

from .config import ConfigError, SystemConfig, load_config, save_config
from .model import Frame, FrameStreams, frame_streams, synthesize_frame

__all__ = [
    "ConfigError", "Frame", "FrameStreams", "SystemConfig", "frame_streams",
    "load_config", "save_config", "synthesize_frame", "__version__",
]
