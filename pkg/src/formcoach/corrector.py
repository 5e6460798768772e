"""One-step-ahead forecasting of the 9 correction angles plus the
deviation-flagging and correction-vector rules.

The forecaster is a per-pose-class model: two BiLSTM layers read a
fixed-length context window and a linear head emits the next 9-angle
vector. A frame's angle is flagged when it misses the prediction by more
than 1.5 residual standard deviations (sigma fitted per angle on correct
performances); the suggested correction moves the angle back to exactly
the 1-sigma boundary.

Everything flag-related runs through one canonical per-frame forward pass
(batch of one) so streamed and batch results are bit-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .augment import shift_augment
from .kinematics import CORRECTION_ANGLE_NAMES, AngleBasis, correction_indices
from .neural import (BiFinalPool, BiLSTM, Dense, SequenceModel, TrainConfig,
                     mse, train)
from .sequence import PoseSequence, impute_missing

DEFAULT_CONTEXT = 10
DEFAULT_HIDDEN = 64
FLAG_MULTIPLIER = 1.5
TARGET_MULTIPLIER = 1.0
PROFILE_FLOOR = 1e-4  # normalized units
NUM_CORRECTION_ANGLES = len(CORRECTION_ANGLE_NAMES)


def to_correction_space(seq: PoseSequence, basis: AngleBasis) -> PoseSequence:
    """Project a full angle sequence onto the 9 named correction angles."""
    idx = correction_indices(basis)
    reduced = seq.values[:, idx]
    return PoseSequence(values=reduced, times=seq.times,
                        pose_class=seq.pose_class, subject_id=seq.subject_id,
                        fps=seq.fps, sequence_id=seq.sequence_id,
                        basis_id=seq.basis_id + ":corr9")


def build_forecaster(pose_class: str, context: int = DEFAULT_CONTEXT,
                     hidden: int = DEFAULT_HIDDEN, seed: int = 0,
                     num_angles: int = NUM_CORRECTION_ANGLES) -> SequenceModel:
    rng = np.random.default_rng(seed)
    layers = [
        BiLSTM(num_angles, hidden, rng),
        BiLSTM(2 * hidden, hidden, rng),
        BiFinalPool(hidden),
        Dense(2 * hidden, num_angles, rng),
    ]
    config = {"pose_class": pose_class, "context": context,
              "angle_names": list(CORRECTION_ANGLE_NAMES)}
    return SequenceModel("forecaster", layers, num_angles, num_angles,
                         config=config)


def context_windows(values_norm: np.ndarray, context: int):
    """All (window, next-frame) training pairs of one normalized sequence.

    Returns X (N, context, q), Y (N, q), and the predicted frame indices
    (context .. T-1).
    """
    T = values_norm.shape[0]
    if T <= context:
        return (np.empty((0, context, values_norm.shape[1])),
                np.empty((0, values_norm.shape[1])), np.empty(0, dtype=int))
    frames = np.arange(context, T)
    X = np.stack([values_norm[t - context:t] for t in frames])
    Y = values_norm[frames]
    return X, Y, frames


def forecast(model: SequenceModel, window_values: np.ndarray) -> np.ndarray:
    """Next 9-angle vector in radians from the trailing context window."""
    context = model.config["context"]
    window_values = np.asarray(window_values, dtype=float)
    if window_values.ndim != 2 or window_values.shape[1] != model.input_dim:
        raise ValueError(f"window must be (frames, {model.input_dim})")
    if window_values.shape[0] < context:
        raise ValueError(f"window has {window_values.shape[0]} frames; the "
                         f"model needs at least {context}")
    x = window_values[-context:] / np.pi
    return model.forward(x[None])[0] * np.pi


def _predict_frames(model: SequenceModel, values_norm: np.ndarray):
    """Per-frame one-step predictions (normalized), canonical batch-of-one.

    This is the single arithmetic path behind flagging, so streaming and
    batch flags cannot drift apart.
    """
    context = model.config["context"]
    T = values_norm.shape[0]
    frames = np.arange(context, T)
    preds = np.empty((len(frames), values_norm.shape[1]))
    for n, t in enumerate(frames):
        preds[n] = model.forward(values_norm[None, t - context:t])[0]
    return preds, frames


def flag_vector(pred_norm: np.ndarray, actual_norm: np.ndarray,
                sigma_norm: np.ndarray):
    """One frame's flag/correction arithmetic, shared by batch and stream.

    Inputs are normalized; deviation and delta come back in radians.
    Flagging is strict (> 1.5 sigma); a flagged angle's delta lands the
    corrected value exactly on the 1 sigma boundary.
    """
    dev = actual_norm - pred_norm
    flagged = np.abs(dev) > FLAG_MULTIPLIER * sigma_norm
    delta = np.where(
        flagged,
        -np.sign(dev) * (np.abs(dev) - TARGET_MULTIPLIER * sigma_norm),
        0.0)
    return flagged, dev * np.pi, delta * np.pi


@dataclass(frozen=True)
class ResidualProfile:
    per_angle_std: np.ndarray        # (9,) normalized units
    pose_class: str

    def __post_init__(self):
        arr = np.asarray(self.per_angle_std, dtype=float)
        if arr.ndim != 1 or np.any(arr <= 0):
            raise ValueError("per-angle stds must be positive")
        object.__setattr__(self, "per_angle_std", arr)

    def to_dict(self) -> dict:
        return {"per_angle_std": self.per_angle_std.tolist(),
                "pose_class": self.pose_class}

    @classmethod
    def from_dict(cls, doc: dict) -> "ResidualProfile":
        return cls(np.asarray(doc["per_angle_std"], dtype=float),
                   doc["pose_class"])


def fit_residual_profile(model: SequenceModel,
                         correct_sequences: list[PoseSequence]
                         ) -> ResidualProfile:
    """Per-angle std of one-step residuals pooled over correct clips."""
    if len(correct_sequences) < 2:
        raise ValueError("need at least 2 correct sequences to fit a profile")
    residuals = []
    for seq in correct_sequences:
        norm = impute_missing(seq.values) / np.pi
        preds, frames = _predict_frames(model, norm)
        if len(frames):
            residuals.append(norm[frames] - preds)
    if not residuals:
        raise ValueError("sequences too short to produce residuals")
    pooled = np.concatenate(residuals, axis=0)
    if pooled.shape[0] < 2:
        raise ValueError("sequences too short to produce residuals")
    std = np.maximum(pooled.std(axis=0, ddof=1), PROFILE_FLOOR)
    return ResidualProfile(std, correct_sequences[0].pose_class or "")


@dataclass(frozen=True)
class FrameRecord:
    frame_index: int
    actual: np.ndarray      # (9,) radians
    predicted: np.ndarray   # (9,) radians
    deviation: np.ndarray   # actual - predicted, radians
    flagged: np.ndarray     # (9,) bool
    delta: np.ndarray       # signed radians; 0 exactly where unflagged


@dataclass
class CorrectionReport:
    pose_class: str
    angle_names: list[str]
    context: int
    profile_std: np.ndarray              # (9,) radians
    frames: list[FrameRecord] = field(default_factory=list)

    @property
    def flagged_count(self) -> int:
        return int(sum(r.flagged.sum() for r in self.frames))

    @property
    def flagged_frame_count(self) -> int:
        return int(sum(bool(r.flagged.any()) for r in self.frames))

    @property
    def worst_angle(self) -> str | None:
        if not self.frames:
            return None
        per_angle = np.sum([r.flagged for r in self.frames], axis=0)
        if per_angle.max() == 0:
            return None
        return self.angle_names[int(np.argmax(per_angle))]

    def to_dict(self) -> dict:
        return {
            "pose_class": self.pose_class,
            "angle_names": self.angle_names,
            "context": self.context,
            "profile_std": self.profile_std.tolist(),
            "summary": {"flagged_count": self.flagged_count,
                        "flagged_frame_count": self.flagged_frame_count,
                        "worst_angle": self.worst_angle,
                        "frame_count": len(self.frames)},
            "frames": [{
                "frame_index": r.frame_index,
                "actual": r.actual.tolist(),
                "predicted": r.predicted.tolist(),
                "deviation": r.deviation.tolist(),
                "flagged": [bool(b) for b in r.flagged],
                "delta": r.delta.tolist(),
            } for r in self.frames],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CorrectionReport":
        report = cls(doc["pose_class"], list(doc["angle_names"]),
                     doc["context"],
                     np.asarray(doc["profile_std"], dtype=float))
        for r in doc["frames"]:
            report.frames.append(FrameRecord(
                r["frame_index"],
                np.asarray(r["actual"]), np.asarray(r["predicted"]),
                np.asarray(r["deviation"]),
                np.asarray(r["flagged"], dtype=bool),
                np.asarray(r["delta"])))
        return report

    def write_plot_csv(self, path) -> None:
        """Per-angle rows for band plots: frame, actual, predicted, band."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frame", "angle", "actual", "predicted",
                             "band_low", "band_high", "flagged"])
            for rec in self.frames:
                for j, name in enumerate(self.angle_names):
                    band = FLAG_MULTIPLIER * self.profile_std[j]
                    writer.writerow([
                        rec.frame_index, name,
                        repr(float(rec.actual[j])),
                        repr(float(rec.predicted[j])),
                        repr(float(rec.predicted[j] - band)),
                        repr(float(rec.predicted[j] + band)),
                        int(rec.flagged[j])])


def flag_and_correct(model: SequenceModel, profile: ResidualProfile,
                     seq: PoseSequence) -> CorrectionReport:
    """Flag per-angle deviations beyond 1.5 sigma and suggest corrections.

    deviation = actual - predicted (normalized for the comparison); a
    flagged angle gets delta = -sign(deviation) * (|deviation| - sigma),
    landing exactly on the 1-sigma boundary. Unflagged angles get 0.
    """
    if (profile.pose_class and seq.pose_class
            and profile.pose_class != seq.pose_class):
        raise ValueError(f"profile is for {profile.pose_class!r}, sequence "
                         f"is {seq.pose_class!r}")
    context = model.config["context"]
    norm = impute_missing(seq.values) / np.pi
    preds, frames = _predict_frames(model, norm)
    sigma = profile.per_angle_std
    report = CorrectionReport(
        pose_class=seq.pose_class or profile.pose_class,
        angle_names=list(model.config["angle_names"]),
        context=context,
        profile_std=sigma * np.pi)
    for n, t in enumerate(frames):
        flagged, deviation, delta = flag_vector(preds[n], norm[t], sigma)
        report.frames.append(FrameRecord(
            frame_index=int(t),
            actual=norm[t] * np.pi,
            predicted=preds[n] * np.pi,
            deviation=deviation,
            flagged=flagged,
            delta=delta))
    return report


@dataclass(frozen=True)
class CorrectorTrainSpec:
    context: int = DEFAULT_CONTEXT
    hidden: int = DEFAULT_HIDDEN
    use_shift_augment: bool = True
    train: TrainConfig = field(default_factory=lambda: TrainConfig(epochs=60))


def train_forecaster(sequences: list[PoseSequence],
                     spec: CorrectorTrainSpec = CorrectorTrainSpec(),
                     ) -> tuple[SequenceModel, list[float]]:
    """Fit one pose class's forecaster on its standardized 9-angle clips.

    Augmentation is index-shift only (never noise): each clip contributes
    the variants with every frame index shifted by -1 and by +1.
    """
    if not sequences:
        raise ValueError("no training sequences")
    classes = {s.pose_class for s in sequences}
    if len(classes) != 1:
        raise ValueError(f"forecaster takes one pose class, got {sorted(map(str, classes))}")
    pose_class = sequences[0].pose_class or ""
    pool = list(sequences)
    if spec.use_shift_augment:
        for seq in sequences:
            pool.extend(shift_augment(seq, np.arange(len(seq))))

    xs, ys = [], []
    for seq in pool:
        norm = impute_missing(seq.values) / np.pi
        X, Y, _ = context_windows(norm, spec.context)
        if len(X):
            xs.append(X)
            ys.append(Y)
    if not xs:
        raise ValueError(f"no clip is longer than the context ({spec.context})")
    inputs = np.concatenate(xs, axis=0)
    targets = np.concatenate(ys, axis=0)

    model = build_forecaster(pose_class, spec.context, spec.hidden,
                             seed=spec.train.seed,
                             num_angles=sequences[0].num_angles)
    history = train(model, inputs, targets, spec.train)
    return model, history


def forecaster_mse(model: SequenceModel, sequences: list[PoseSequence]) -> float:
    """Mean squared one-step error (normalized units) over a dataset."""
    xs, ys = [], []
    context = model.config["context"]
    for seq in sequences:
        norm = impute_missing(seq.values) / np.pi
        X, Y, _ = context_windows(norm, context)
        if len(X):
            xs.append(X)
            ys.append(Y)
    if not xs:
        raise ValueError("no sequence long enough to evaluate")
    inputs = np.concatenate(xs, axis=0)
    targets = np.concatenate(ys, axis=0)
    loss, _ = mse(model.forward(inputs), targets)
    return loss


def inject_deviation(seq: PoseSequence, angle_index: int, magnitude: float,
                     frame_indices) -> PoseSequence:
    """Add a fixed offset to one angle at chosen frames (synthetic errors)."""
    values = seq.values.copy()
    idx = np.asarray(frame_indices, dtype=int)
    values[idx, angle_index] += magnitude
    return seq.with_frames(values, seq.times)


def injection_sites(length: int, context: int, spacing: int | None = None
                    ) -> np.ndarray:
    """Frames to perturb, spaced so no site falls in another's context."""
    spacing = spacing if spacing is not None else context + 1
    return np.arange(context, length, spacing)
