"""Losses with hand-derived gradients."""

from __future__ import annotations

import numpy as np


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean softmax cross-entropy over the batch.

    logits (B, C), labels (B,) integer classes. Returns (loss, dlogits)
    with dlogits already divided by the batch size.
    """
    B = logits.shape[0]
    probs = softmax(logits)
    picked = probs[np.arange(B), labels]
    loss = float(-np.log(np.maximum(picked, 1e-300)).mean())
    dlogits = probs.copy()
    dlogits[np.arange(B), labels] -= 1.0
    return loss, dlogits / B


def mse(pred: np.ndarray, target: np.ndarray):
    """Mean squared error over every element; gradient matches the mean."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    return loss, 2.0 * diff / diff.size
