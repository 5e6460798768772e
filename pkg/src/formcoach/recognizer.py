"""Pose recognition: key frames -> recurrent classifier -> label.

The classifier consumes the k most dynamic frames of a clip (normalized
angle vectors), runs them through an LSTM, optionally multi-head
attention, mean-pools over time, and maps to class logits. Class labels
live in the model config; nothing is hard-coded to six classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .augment import noise_augment
from .keyframe import (DEFAULT_K, DEFAULT_WINDOW, min_frames_for_keyframes,
                       rolling_stats, select_keyframes)
from .neural import (LSTM, Dense, MeanPool, MultiHeadAttention, SequenceModel,
                     TrainConfig, softmax, train)
from .sequence import PoseSequence, impute_missing

DEFAULT_HIDDEN = 128
DEFAULT_HEADS = 4


def build_recognizer(num_angles: int, labels: list[str],
                     k: int = DEFAULT_K, window: int = DEFAULT_WINDOW,
                     hidden: int = DEFAULT_HIDDEN, heads: int = DEFAULT_HEADS,
                     attention: bool = True, seed: int = 0) -> SequenceModel:
    rng = np.random.default_rng(seed)
    layers = [LSTM(num_angles, hidden, rng)]
    if attention:
        layers.append(MultiHeadAttention(hidden, heads, rng))
    layers += [MeanPool(), Dense(hidden, len(labels), rng)]
    config = {"labels": list(labels), "k": k, "window": window,
              "attention": attention}
    return SequenceModel("recognizer", layers, num_angles, len(labels),
                         config=config)


def keyframe_features(seq: PoseSequence, k: int, window: int) -> np.ndarray:
    """(k, num_angles) normalized matrix of the clip's key frames."""
    needed = min_frames_for_keyframes(k, window)
    if len(seq) < needed:
        raise ValueError(f"sequence has {len(seq)} frames; recognition needs "
                         f"at least {needed}")
    stats = rolling_stats(seq, window)
    kfs = select_keyframes(stats, k)
    filled = impute_missing(seq.values)
    feats = filled[kfs.indices] / np.pi
    if feats.shape[0] != k:
        raise ValueError(f"only {feats.shape[0]} key frames available, need {k}")
    return feats


def classify(seq: PoseSequence, model: SequenceModel,
             k: int | None = None) -> tuple[str, np.ndarray]:
    k = k if k is not None else model.config["k"]
    window = model.config["window"]
    feats = keyframe_features(seq, k, window)
    logits = model.forward(feats[None, :, :])[0]
    probs = softmax(logits)
    return model.config["labels"][int(np.argmax(probs))], probs


@dataclass
class Metrics:
    accuracy: float
    macro_f1: float
    per_class_accuracy: dict[str, float]
    confusion: np.ndarray          # rows = true class, cols = predicted
    labels: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "macro_f1": self.macro_f1,
                "per_class_accuracy": self.per_class_accuracy,
                "confusion": self.confusion.tolist(), "labels": self.labels}


def metrics_from_confusion(confusion: np.ndarray, labels: list[str]) -> Metrics:
    confusion = np.asarray(confusion, dtype=int)
    total = confusion.sum()
    if total == 0:
        raise ValueError("empty evaluation")
    accuracy = float(np.trace(confusion) / total)
    per_class = {}
    f1s = []
    for i, label in enumerate(labels):
        support = confusion[i].sum()
        if support == 0:
            continue  # class absent from the truth set: omitted
        per_class[label] = float(confusion[i, i] / support)
        precision_den = confusion[:, i].sum()
        precision = confusion[i, i] / precision_den if precision_den else 0.0
        recall = confusion[i, i] / support
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall > 0 else 0.0)
        f1s.append(f1)
    return Metrics(accuracy, float(np.mean(f1s)), per_class, confusion,
                   list(labels))


def evaluate(model: SequenceModel, sequences: list[PoseSequence]) -> Metrics:
    if not sequences:
        raise ValueError("empty evaluation set")
    labels = model.config["labels"]
    index = {lab: i for i, lab in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=int)
    for seq in sequences:
        if seq.pose_class not in index:
            raise ValueError(f"sequence class {seq.pose_class!r} unknown to model")
        pred, _ = classify(seq, model)
        confusion[index[seq.pose_class], index[pred]] += 1
    return metrics_from_confusion(confusion, labels)


@dataclass(frozen=True)
class RecognizerTrainSpec:
    hidden: int = DEFAULT_HIDDEN
    heads: int = DEFAULT_HEADS
    attention: bool = True
    k: int = DEFAULT_K
    window: int = DEFAULT_WINDOW
    noise_copies: int = 2
    noise_scale: float = 0.1
    train: TrainConfig = field(default_factory=TrainConfig)


def train_recognizer(sequences: list[PoseSequence],
                     spec: RecognizerTrainSpec = RecognizerTrainSpec(),
                     ) -> tuple[SequenceModel, list[float]]:
    """Build and fit a recognizer on labeled sequences.

    Noise augmentation happens here (recognition route only): each clip
    contributes itself plus `noise_copies` perturbed copies.
    """
    if not sequences:
        raise ValueError("no training sequences")
    labels = sorted({s.pose_class for s in sequences})
    if None in labels:
        raise ValueError("every training sequence needs a pose class")
    num_angles = sequences[0].num_angles
    rng = np.random.default_rng(spec.train.seed)

    pool = list(sequences)
    if spec.noise_copies > 0:
        for seq in sequences:
            pool.extend(noise_augment(seq, spec.noise_copies, rng,
                                      scale=spec.noise_scale))

    feats = np.stack([keyframe_features(s, spec.k, spec.window) for s in pool])
    index = {lab: i for i, lab in enumerate(labels)}
    targets = np.array([index[s.pose_class] for s in pool], dtype=int)

    model = build_recognizer(num_angles, labels, spec.k, spec.window,
                             spec.hidden, spec.heads, spec.attention,
                             seed=spec.train.seed)
    history = train(model, feats, targets, spec.train)
    return model, history


def stratified_folds(labels: list[str], folds: int, seed: int) -> np.ndarray:
    """Fold id per item, each class spread as evenly as possible."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    assignment = np.full(len(labels), -1, dtype=int)
    for cls in sorted(set(labels.tolist())):
        idx = np.where(labels == cls)[0]
        if len(idx) < folds:
            raise ValueError(f"class {cls!r} has {len(idx)} sequences, "
                             f"fewer than {folds} folds")
        perm = rng.permutation(len(idx))
        assignment[idx[perm]] = np.arange(len(idx)) % folds
    return assignment


def cross_validate(sequences: list[PoseSequence], folds: int,
                   spec: RecognizerTrainSpec = RecognizerTrainSpec(),
                   seed: int = 0) -> dict:
    if len(sequences) < folds:
        raise ValueError("dataset smaller than fold count")
    assignment = stratified_folds([s.pose_class for s in sequences], folds, seed)
    fold_metrics = []
    for f in range(folds):
        train_seqs = [s for s, a in zip(sequences, assignment) if a != f]
        test_seqs = [s for s, a in zip(sequences, assignment) if a == f]
        model, _ = train_recognizer(train_seqs, spec)
        fold_metrics.append(evaluate(model, test_seqs))
    accs = np.array([m.accuracy for m in fold_metrics])
    f1s = np.array([m.macro_f1 for m in fold_metrics])
    return {
        "folds": [m.to_dict() for m in fold_metrics],
        "mean_accuracy": float(accs.mean()),
        "std_accuracy": float(accs.std(ddof=1)) if folds > 1 else 0.0,
        "mean_macro_f1": float(f1s.mean()),
        "std_macro_f1": float(f1s.std(ddof=1)) if folds > 1 else 0.0,
    }
