"""Iterative Bernoulli-LLR activity detection on the sample/entry/constraint graph."""

from ._backend import available_backends, get_backend
from .detect import (DEFAULT_CN_LOG_CLIP, DEFAULT_LLR_CLIP, DEFAULT_VAR_FLOOR,
                     DetectionResult, DetectorParams, MessageState, detect,
                     detect_frames, harden)
from .weighted import weighted_forward
from .weights import (WeightFormatError, WeightSet, load_weights,
                      make_unit_weights, save_weights)

__all__ = [
    "DEFAULT_CN_LOG_CLIP", "DEFAULT_LLR_CLIP", "DEFAULT_VAR_FLOOR",
    "DetectionResult", "DetectorParams", "MessageState", "WeightFormatError",
    "WeightSet", "available_backends", "detect", "detect_frames", "get_backend",
    "harden", "load_weights", "make_unit_weights", "save_weights",
    "weighted_forward",
]
