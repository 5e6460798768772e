"""Mini-batch training loop: BPTT, Adam, global-norm clipping.

Deterministic for a fixed seed in single-threaded numpy: shuffling,
batching, and updates all derive from one seeded generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import cross_entropy, mse
from .model import SequenceModel
from .optim import Adam, clip_by_global_norm


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 16
    epochs: int = 40
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 5.0

    def __post_init__(self):
        if self.learning_rate < 0 or self.batch_size < 1 or self.epochs < 0:
            raise ValueError("rates and sizes must be positive")


def train(model: SequenceModel, inputs: np.ndarray, targets: np.ndarray,
          config: TrainConfig) -> list[float]:
    """Fit in place; returns per-epoch mean training loss.

    inputs (N, T, D) in normalized units. For a recognizer, targets are
    integer labels (N,); for a forecaster, target vectors (N, output_dim).
    A non-finite loss aborts with the name of the first bad tensor.
    """
    n = inputs.shape[0]
    if n == 0:
        raise ValueError("empty dataset")
    rng = np.random.default_rng(config.seed)
    params = model.flat_params()
    grads = model.flat_grads()
    opt = Adam(config.learning_rate, config.beta1, config.beta2, config.eps)
    is_classifier = model.kind == "recognizer"

    history = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            x = inputs[idx]
            y = targets[idx]
            out = model.forward(x)
            if is_classifier:
                loss, dout = cross_entropy(out, y)
            else:
                loss, dout = mse(out, y)
            if not np.isfinite(loss):
                _raise_non_finite(model, loss, epoch)
            model.zero_grads()
            model.backward(dout)
            clip_by_global_norm(grads, config.clip_norm)
            opt.step(params, grads)
            total += loss * len(idx)
        history.append(total / n)
    return history


def _raise_non_finite(model: SequenceModel, loss: float, epoch: int):
    for name, arr in model.flat_params().items():
        if not np.all(np.isfinite(arr)):
            raise RuntimeError(
                f"non-finite loss {loss} at epoch {epoch}; first bad tensor: {name}")
    raise RuntimeError(
        f"non-finite loss {loss} at epoch {epoch}; parameters finite, "
        f"check inputs/targets")
