"""Training-set augmentation.

Two routes, deliberately not interchangeable: additive Gaussian angle
noise feeds the recognizer only, and frame-index shifting feeds the
corrector only. Noise would corrupt the corrector's notion of an exact
joint trajectory; index shifts reuse real frames at a temporal offset.
"""

from __future__ import annotations

import numpy as np

from .sequence import PoseSequence

NOISE_SCALE = 0.1
ENVELOPE_FRACTION = 0.1


def plausibility_envelope(value_arrays: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Per-angle plausible range over a training split.

    The observed [min, max] per angle, widened by 10% of the range on each
    side and intersected with [0, pi]. Computed across every frame of every
    provided array so one clip's extremes do not clip another's.
    """
    stacked = np.concatenate([np.asarray(v, dtype=float) for v in value_arrays], axis=0)
    lo = np.nanmin(stacked, axis=0)
    hi = np.nanmax(stacked, axis=0)
    span = hi - lo
    lo = np.maximum(lo - ENVELOPE_FRACTION * span, 0.0)
    hi = np.minimum(hi + ENVELOPE_FRACTION * span, np.pi)
    return lo, hi


def noise_augment(seq: PoseSequence, copies: int, rng: np.random.Generator,
                  scale: float = NOISE_SCALE,
                  envelope: tuple[np.ndarray, np.ndarray] | None = None,
                  ) -> list[PoseSequence]:
    """Noisy copies for recognition training.

    Each copy adds zero-mean Gaussian noise per angle with std equal to
    scale times that angle's own within-sequence std, then clamps to the
    plausibility envelope (the clip's own when none is given) and [0, pi].
    Zero-variance angles come back exactly as they were; missing entries
    stay missing.
    """
    if copies < 1:
        raise ValueError("copies must be >= 1")
    if not 0.0 < scale <= 1.0:
        raise ValueError(f"scale must be in (0, 1], got {scale}")
    values = seq.values
    defined = np.isfinite(values)
    with np.errstate(invalid="ignore"):
        col_std = np.nanstd(values, axis=0, ddof=1)
    col_std = np.where(np.isfinite(col_std), col_std, 0.0)
    if envelope is None:
        envelope = plausibility_envelope([values])
    lo, hi = envelope

    out = []
    for _ in range(copies):
        noise = rng.normal(0.0, 1.0, size=values.shape) * (scale * col_std)
        noisy = np.where(defined, np.clip(values + noise, lo, hi), np.nan)
        out.append(seq.with_frames(noisy, seq.times))
    return out


def shift_augment(seq: PoseSequence, frame_indices) -> list[PoseSequence]:
    """Two variants reusing real frames one index early and one late.

    The selected indices are shifted by -1 and by +1, clamped to the clip
    bounds; a clamp that makes two selections collide keeps one copy of
    that frame, so a variant can end up one frame short. Frame values are
    copied verbatim, never synthesized.
    """
    if len(seq) < 3:
        raise ValueError("shift augmentation needs at least 3 frames")
    idx = np.asarray(frame_indices, dtype=int)
    if idx.size == 0:
        raise ValueError("no frames selected")
    if np.any(idx < 0) or np.any(idx >= len(seq)):
        raise ValueError("selected frame index out of range")
    out = []
    for delta in (-1, +1):
        shifted = np.unique(np.clip(idx + delta, 0, len(seq) - 1))
        out.append(seq.take(shifted))
    return out
