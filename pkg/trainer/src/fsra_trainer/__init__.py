"""Off-line training of the unfolded weighted activity detector."""

__version__ = "0.1.0"

from .losses import cross_entropy, detection_loss
from .network import UnfoldedDetector, log_activation, prior_log_odds
from .training import EpochStats, TrainConfig, TrainingDiverged, train

__all__ = [
    "EpochStats", "TrainConfig", "TrainingDiverged", "UnfoldedDetector",
    "cross_entropy", "detection_loss", "log_activation", "prior_log_odds",
    "train", "__version__",
]
