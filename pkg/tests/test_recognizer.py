import numpy as np
import pytest

from formcoach.dataio import SyntheticSpec, split_indices, synth_sequences
from formcoach.keyframe import min_frames_for_keyframes
from formcoach.recognizer import (RecognizerTrainSpec, build_recognizer,
                                  classify, cross_validate, evaluate,
                                  keyframe_features, metrics_from_confusion,
                                  stratified_folds, train_recognizer)
from formcoach.neural import TrainConfig
from formcoach.sequence import PoseSequence


def _seq(values, cls="pose_a"):
    values = np.asarray(values, dtype=float)
    return PoseSequence(values=values, times=np.arange(len(values)) / 30.0,
                        pose_class=cls)


# ------------------------------------------------------------------ metrics

def test_metrics_from_confusion_hand_counts():
    # 9+8 correct of 20 -> acc 0.85; per-class F1: a: p=9/11 r=9/10,
    # b: p=8/9 r=8/10
    m = metrics_from_confusion(np.array([[9, 1], [2, 8]]), ["a", "b"])
    assert m.accuracy == pytest.approx(0.85)
    f1_a = 2 * (9 / 11) * (9 / 10) / (9 / 11 + 9 / 10)
    f1_b = 2 * (8 / 9) * (8 / 10) / (8 / 9 + 8 / 10)
    assert m.macro_f1 == pytest.approx((f1_a + f1_b) / 2)
    assert m.per_class_accuracy == {"a": pytest.approx(0.9),
                                    "b": pytest.approx(0.8)}


def test_metrics_perfect_and_zero():
    perfect = metrics_from_confusion(np.eye(3, dtype=int) * 5, ["a", "b", "c"])
    assert perfect.accuracy == 1.0 and perfect.macro_f1 == 1.0
    wrong = metrics_from_confusion(np.array([[0, 4], [4, 0]]), ["a", "b"])
    assert wrong.accuracy == 0.0 and wrong.macro_f1 == 0.0


def test_metrics_skips_absent_class():
    # class c never appears in truth; F1 averaged over present classes only
    conf = np.array([[5, 0, 0], [0, 5, 0], [0, 0, 0]])
    m = metrics_from_confusion(conf, ["a", "b", "c"])
    assert m.macro_f1 == 1.0
    assert "c" not in m.per_class_accuracy


def test_metrics_empty_confusion_rejected():
    with pytest.raises(ValueError):
        metrics_from_confusion(np.zeros((2, 2), dtype=int), ["a", "b"])


def test_metrics_to_dict_roundtrips_confusion():
    m = metrics_from_confusion(np.array([[3, 1], [0, 4]]), ["a", "b"])
    d = m.to_dict()
    assert d["confusion"] == [[3, 1], [0, 4]]
    assert d["labels"] == ["a", "b"]


# --------------------------------------------------------- keyframe features

def test_keyframe_features_shape_and_scale():
    rng = np.random.default_rng(0)
    seq = _seq(rng.uniform(0, np.pi, size=(30, 6)))
    feats = keyframe_features(seq, k=10, window=5)
    assert feats.shape == (10, 6)
    assert feats.min() >= 0.0 and feats.max() <= 1.0  # angles scaled by pi


def test_keyframe_features_short_clip_rejected():
    needed = min_frames_for_keyframes(10, 5)
    seq = _seq(np.zeros((needed - 1, 3)))
    with pytest.raises(ValueError, match="at least"):
        keyframe_features(seq, k=10, window=5)


def test_keyframe_features_exact_minimum_accepted():
    needed = min_frames_for_keyframes(10, 5)
    rng = np.random.default_rng(1)
    seq = _seq(rng.uniform(0, np.pi, size=(needed, 4)))
    assert keyframe_features(seq, 10, 5).shape == (10, 4)


# ----------------------------------------------------------------- classify

def test_classify_returns_label_and_distribution():
    rng = np.random.default_rng(2)
    seq = _seq(rng.uniform(0, np.pi, size=(25, 5)))
    model = build_recognizer(5, ["a", "b", "c"], seed=0)
    label, probs = classify(seq, model)
    assert label in ("a", "b", "c")
    assert probs.shape == (3,)
    assert probs.sum() == pytest.approx(1.0)
    assert label == ["a", "b", "c"][int(np.argmax(probs))]


def test_evaluate_rejects_unknown_class():
    rng = np.random.default_rng(3)
    seq = _seq(rng.uniform(0, np.pi, size=(25, 5)), cls="mystery")
    model = build_recognizer(5, ["a", "b"], seed=0)
    with pytest.raises(ValueError, match="unknown"):
        evaluate(model, [seq])
    with pytest.raises(ValueError, match="empty"):
        evaluate(model, [])


# ------------------------------------------------------------------- splits

def test_stratified_folds_balanced():
    labels = ["a"] * 9 + ["b"] * 9
    assignment = stratified_folds(labels, 3, seed=0)
    la = np.asarray(labels)
    for f in range(3):
        assert (la[assignment == f] == "a").sum() == 3
        assert (la[assignment == f] == "b").sum() == 3


def test_stratified_folds_too_small():
    with pytest.raises(ValueError, match="fewer"):
        stratified_folds(["a", "a", "b"], 2, seed=0)
    with pytest.raises(ValueError, match=">= 2"):
        stratified_folds(["a", "a"], 1, seed=0)


# ----------------------------------------------------------------- training

@pytest.fixture(scope="module")
def small_problem():
    spec = SyntheticSpec(num_classes=3, sequences_per_class=12, num_angles=8,
                         frames_mean=30, frames_jitter=4, seed=7)
    seqs = synth_sequences(spec)
    labels = [s.pose_class for s in seqs]
    train_idx, test_idx = split_indices(labels, 0.75, seed=0)
    return ([seqs[i] for i in train_idx], [seqs[i] for i in test_idx])


def test_train_recognizer_learns_small_problem(small_problem):
    train_seqs, test_seqs = small_problem
    spec = RecognizerTrainSpec(hidden=32, heads=2,
                               train=TrainConfig(epochs=20, batch_size=8,
                                                 seed=0))
    model, history = train_recognizer(train_seqs, spec)
    assert history[-1] < history[0]
    m = evaluate(model, test_seqs)
    assert m.accuracy >= 0.8
    assert sorted(model.config["labels"]) == model.config["labels"]


def test_train_recognizer_deterministic(small_problem):
    train_seqs, _ = small_problem
    spec = RecognizerTrainSpec(hidden=16, heads=2, noise_copies=1,
                               train=TrainConfig(epochs=2, batch_size=8,
                                                 seed=5))
    m1, h1 = train_recognizer(train_seqs, spec)
    m2, h2 = train_recognizer(train_seqs, spec)
    assert h1 == h2
    f1, f2 = m1.flat_params(), m2.flat_params()
    assert f1.keys() == f2.keys()
    for name in f1:
        np.testing.assert_array_equal(f1[name], f2[name])


def test_train_recognizer_requires_labels():
    rng = np.random.default_rng(4)
    seq = PoseSequence(values=rng.uniform(0, np.pi, size=(25, 4)),
                       times=np.arange(25) / 30.0)
    with pytest.raises(ValueError, match="pose class"):
        train_recognizer([seq])
    with pytest.raises(ValueError, match="no training"):
        train_recognizer([])


def test_cross_validate_reports_folds(small_problem):
    train_seqs, _ = small_problem
    spec = RecognizerTrainSpec(hidden=16, heads=2, noise_copies=0,
                               train=TrainConfig(epochs=3, batch_size=8,
                                                 seed=0))
    report = cross_validate(train_seqs, 3, spec, seed=0)
    assert len(report["folds"]) == 3
    assert 0.0 <= report["mean_accuracy"] <= 1.0
    assert report["std_accuracy"] >= 0.0
