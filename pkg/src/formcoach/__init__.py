"""Pose recognition and corrective-feedback toolkit for joint-angle streams."""

__version__ = "0.1.0"

from .corrector import (CorrectionReport, ResidualProfile, flag_and_correct,
                        forecaster_mse, train_forecaster)
from .keyframe import rolling_stats, select_keyframes
from .kinematics import KeypointFrame, build_default_basis, extract_features
from .recognizer import classify, evaluate, train_recognizer
from .registry import ModelRegistry
from .sequence import PoseSequence
from .standardize import standardize

__all__ = [
    "CorrectionReport", "KeypointFrame", "ModelRegistry", "PoseSequence",
    "ResidualProfile", "build_default_basis", "classify", "evaluate",
    "extract_features", "flag_and_correct", "forecaster_mse", "rolling_stats",
    "select_keyframes", "standardize", "train_forecaster", "train_recognizer",
    "__version__",
]
