"""Clip-length standardization for correction training.

Every clip of a pose class is brought to the class's average frame count.
Overlong clips lose frames one at a time at the point of least posture
change (minimal aggregated deviation E); short clips gain frames one at a
time next to the point of greatest change (maximal E), the new frame
sampled from a natural cubic spline fitted per angle over an 11-frame
window and evaluated halfway between the peak frame and its successor.
Statistics are recomputed after every removal or insertion.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

from .keyframe import DEFAULT_WINDOW, rolling_stats
from .sequence import PoseSequence, impute_missing

SPLINE_HALF_WINDOW = 5
OVERSHOOT_FRACTION = 0.05


def target_length(sequences: list[PoseSequence], pose_class: str) -> int:
    """Average frame count of the class, rounded half-up."""
    lengths = [len(s) for s in sequences if s.pose_class == pose_class]
    if not lengths:
        raise ValueError(f"no sequences of class {pose_class!r}")
    return int(np.floor(np.mean(lengths) + 0.5))


def trim_sequence(seq: PoseSequence, target: int,
                  window: int = DEFAULT_WINDOW) -> PoseSequence:
    """Iteratively drop the frame with minimal E until len(seq) == target.

    Boundary frames (no defined E) are never removed; surviving frame
    values are untouched. Ties go to the lowest frame index.
    """
    if len(seq) <= target:
        raise ValueError(f"trim needs more than {target} frames, got {len(seq)}")
    if target < window:
        raise ValueError(f"target {target} is below the stats window {window}")
    out = seq
    while len(out) > target:
        e = rolling_stats(out, window).aggregated
        drop = int(np.nanargmin(e))  # first occurrence wins ties
        keep = np.arange(len(out)) != drop
        out = out.with_frames(out.values[keep], out.times[keep])
    return out


def insert_frames(seq: PoseSequence, target: int,
                  window: int = DEFAULT_WINDOW) -> PoseSequence:
    """Iteratively insert spline-sampled frames until len(seq) == target.

    Each round finds the defined frame t with maximal E, fits a natural
    cubic spline per angle over frames [t-5, t+5] (clipped to the clip),
    and inserts the spline value at parameter t + 0.5 as a new frame at
    position t + 1. Inserted values run on the mean-imputed matrix, are
    kept inside the window's value range plus a 5% overshoot allowance,
    and are hard-clamped to [0, pi]. The new timestamp is the midpoint of
    its neighbors'.
    """
    if len(seq) >= target:
        raise ValueError(f"insert needs fewer than {target} frames, got {len(seq)}")
    if len(seq) < window:
        raise ValueError(f"sequence has {len(seq)} frames; need at least {window}")
    out = seq
    while len(out) < target:
        e = rolling_stats(out, window).aggregated
        t = int(np.nanargmax(e))
        lo = max(0, t - SPLINE_HALF_WINDOW)
        hi = min(len(out) - 1, t + SPLINE_HALF_WINDOW)
        filled = impute_missing(out.values)
        x = np.arange(lo, hi + 1, dtype=float)
        spline = CubicSpline(x, filled[lo:hi + 1], axis=0, bc_type="natural")
        new_vals = np.asarray(spline(t + 0.5), dtype=float)

        win = filled[lo:hi + 1]
        wmin, wmax = win.min(axis=0), win.max(axis=0)
        slack = OVERSHOOT_FRACTION * (wmax - wmin)
        new_vals = np.clip(new_vals, wmin - slack, wmax + slack)
        new_vals = np.clip(new_vals, 0.0, np.pi)

        new_time = 0.5 * (out.times[t] + out.times[t + 1])
        values = np.insert(out.values, t + 1, new_vals, axis=0)
        times = np.insert(out.times, t + 1, new_time)
        out = out.with_frames(values, times)
    return out


def standardize(seq: PoseSequence, sequences: list[PoseSequence],
                pose_class: str, window: int = DEFAULT_WINDOW) -> PoseSequence:
    """Bring one clip to its class's target length; identity when already there."""
    target = target_length(sequences, pose_class)
    if len(seq) == target:
        return seq
    if len(seq) > target:
        return trim_sequence(seq, target, window)
    return insert_frames(seq, target, window)
