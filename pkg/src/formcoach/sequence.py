"""Ordered angle-vector sequences with metadata.

A PoseSequence stores one clip's angle features as a (frames x angles)
array in radians, NaN marking undefined entries. Consumers that need a
fully defined matrix impute NaNs with the per-angle sequence mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class PoseSequence:
    values: np.ndarray                 # (T, q) radians, NaN = missing
    times: np.ndarray                  # (T,) seconds, nondecreasing
    pose_class: str | None = None
    subject_id: str | None = None
    fps: float | None = None
    sequence_id: str | None = None
    basis_id: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise ValueError(f"values must be 2D (frames x angles), got {vals.shape}")
        times = np.asarray(self.times, dtype=float)
        if times.shape != (vals.shape[0],):
            raise ValueError("times length must match frame count")
        if times.size > 1 and np.any(np.diff(times) < 0):
            raise ValueError("times must be nondecreasing")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def num_angles(self) -> int:
        return self.values.shape[1]

    def with_frames(self, values: np.ndarray, times: np.ndarray) -> "PoseSequence":
        return replace(self, values=values, times=times)

    def take(self, indices) -> "PoseSequence":
        idx = np.asarray(indices, dtype=int)
        return self.with_frames(self.values[idx].copy(), self.times[idx].copy())


def impute_missing(values: np.ndarray) -> np.ndarray:
    """Replace NaN entries with the per-angle mean over defined frames.

    Angles undefined at every frame fall back to 0.0; the constant value
    contributes nothing to any variance statistic downstream.
    """
    values = np.asarray(values, dtype=float)
    if not np.isnan(values).any():
        return values.copy()
    out = values.copy()
    with np.errstate(invalid="ignore"):
        col_mean = np.nanmean(np.where(np.isfinite(values), values, np.nan), axis=0)
    col_mean = np.where(np.isfinite(col_mean), col_mean, 0.0)
    nan_r, nan_c = np.where(np.isnan(out))
    out[nan_r, nan_c] = col_mean[nan_c]
    return out
