"""Rolling posture-variability statistics and key-frame selection.

For a sequence F (frames x angles), a centered window of odd length p
gives per-angle local statistics

    mu[t, j]    = mean of F[t-h .. t+h, j],            h = p // 2
    sigma[t, j] = sample std of the same window        (divisor p - 1)
    E[t]        = mean over j of sigma[t, j]

E measures overall posture change around frame t; its interior local
maxima are the candidate key frames. Statistics exist only for
t in [h, T-1-h]; boundary frames carry NaN and are never candidates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .sequence import PoseSequence, impute_missing

DEFAULT_WINDOW = 5
DEFAULT_K = 10


@dataclass(frozen=True)
class RollingStats:
    local_mean: np.ndarray   # (T, q), NaN on boundary rows
    local_std: np.ndarray    # (T, q), NaN on boundary rows
    aggregated: np.ndarray   # (T,) E, NaN on boundary rows
    window: int

    @property
    def valid_range(self) -> tuple[int, int]:
        """Inclusive [lo, hi] frame range where statistics are defined."""
        h = self.window // 2
        return h, len(self.aggregated) - 1 - h

    def defined_frames(self) -> np.ndarray:
        return np.where(np.isfinite(self.aggregated))[0]


@dataclass(frozen=True)
class KeyFrameSet:
    indices: np.ndarray   # ascending frame indices
    k: int
    scores: np.ndarray    # E at each selected index

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        if idx.size > 1 and np.any(np.diff(idx) <= 0):
            raise ValueError("key-frame indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "scores", np.asarray(self.scores, dtype=float))


def rolling_stats(seq: PoseSequence, window: int = DEFAULT_WINDOW) -> RollingStats:
    """Centered rolling mean/std per angle plus the aggregated deviation E."""
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    T = len(seq)
    if T < window:
        raise ValueError(f"sequence has {T} frames; rolling stats need at least {window}")
    filled = impute_missing(seq.values)
    wins = sliding_window_view(filled, window, axis=0)      # (T-p+1, q, p)
    mean = wins.mean(axis=2)
    std = wins.std(axis=2, ddof=1)

    h = window // 2
    q = filled.shape[1]
    local_mean = np.full((T, q), np.nan)
    local_std = np.full((T, q), np.nan)
    local_mean[h:T - h] = mean
    local_std[h:T - h] = std
    aggregated = np.full(T, np.nan)
    aggregated[h:T - h] = std.mean(axis=1)
    return RollingStats(local_mean, local_std, aggregated, window)


def local_maxima(aggregated: np.ndarray) -> np.ndarray:
    """Frames strictly greater than both neighbors, within the defined range.

    Plateau ties are not maxima; both neighbors must be defined.
    """
    e = np.asarray(aggregated, dtype=float)
    defined = np.isfinite(e)
    cand = np.zeros(len(e), dtype=bool)
    if len(e) >= 3:
        interior = defined[1:-1] & defined[:-2] & defined[2:]
        cand[1:-1] = interior & (e[1:-1] > e[:-2]) & (e[1:-1] > e[2:])
    return np.where(cand)[0]


def select_keyframes(stats: RollingStats, k: int = DEFAULT_K) -> KeyFrameSet:
    """Top-k interior local maxima of E, returned in ascending frame order.

    When fewer than k local maxima exist, the selection falls back to the
    top-k defined frames by E value. Equal E values break toward the lower
    frame index. The result holds min(k, candidate count) frames.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    e = stats.aggregated
    candidates = local_maxima(e)
    if len(candidates) < k:
        candidates = stats.defined_frames()
    chosen = _top_k_by_value(e, candidates, k)
    return KeyFrameSet(chosen, k, e[chosen])


def _top_k_by_value(e: np.ndarray, candidates: np.ndarray, k: int) -> np.ndarray:
    if len(candidates) == 0:
        return candidates
    # sort by (-value, index): stable deterministic tie-break toward low index
    order = np.lexsort((candidates, -e[candidates]))
    selected = candidates[order[:k]]
    return np.sort(selected)


def min_frames_for_keyframes(k: int, window: int = DEFAULT_WINDOW) -> int:
    """Shortest sequence guaranteed to yield k frames with defined E."""
    return k + window - 1
