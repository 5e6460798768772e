"""Canonical body landmarks and the default analysis subset.

The canonical set is the 33-point full-body landmark layout emitted by
common pose estimators. Analysis uses a reduced subset of 17 landmarks
(head plus the major limb and torso joints); eyes, ears, mouth and
finger landmarks are dropped as irrelevant to exercise form.
"""

from __future__ import annotations

from dataclasses import dataclass

CANONICAL_LANDMARKS: tuple[str, ...] = (
    "nose",
    "left_eye_inner", "left_eye", "left_eye_outer",
    "right_eye_inner", "right_eye", "right_eye_outer",
    "left_ear", "right_ear",
    "mouth_left", "mouth_right",
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_pinky", "right_pinky",
    "left_index", "right_index",
    "left_thumb", "right_thumb",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
    "left_heel", "right_heel",
    "left_foot_index", "right_foot_index",
)

LANDMARK_INDEX: dict[str, int] = {name: i for i, name in enumerate(CANONICAL_LANDMARKS)}

# 17 landmarks kept for angle features: head + shoulders, elbows, wrists,
# hips, knees, ankles, heels, foot tips. C(17,3) = 680 angle triples.
DEFAULT_SUBSET_NAMES: tuple[str, ...] = (
    "nose",
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
    "left_heel", "right_heel",
    "left_foot_index", "right_foot_index",
)


@dataclass(frozen=True)
class LandmarkSubset:
    """Ordered selection of canonical landmarks used to build an angle basis."""

    names: tuple[str, ...]

    def __post_init__(self):
        unknown = [n for n in self.names if n not in LANDMARK_INDEX]
        if unknown:
            raise ValueError(f"unknown landmarks: {unknown}")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate landmarks in subset")
        if len(self.names) < 3:
            raise ValueError("subset needs at least 3 landmarks")

    def __len__(self) -> int:
        return len(self.names)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(LANDMARK_INDEX[n] for n in self.names)


def default_subset() -> LandmarkSubset:
    return LandmarkSubset(DEFAULT_SUBSET_NAMES)
