"""Analytic-vs-numeric gradient verification.

Central differences with step 1e-5 in double precision; parameters are
sampled per tensor rather than swept, which keeps the check fast on real
model sizes while still touching every tensor.
"""

from __future__ import annotations

import numpy as np

from .losses import cross_entropy, mse
from .model import SequenceModel

STEP = 1e-5
SAMPLES_PER_TENSOR = 200
# Below MEASURABLE the central difference is dominated by cancellation
# noise (~eps * |loss| / step ~ 1e-11), so a ratio there is meaningless;
# such entries must instead agree absolutely within ABS_TOL, which sits
# orders of magnitude above the noise floor but catches real sign or
# routing bugs.
MEASURABLE = 1e-6
ABS_TOL = 1e-8


def _loss_only(model: SequenceModel, x, target) -> float:
    out = model.forward(x)
    if model.kind == "recognizer":
        loss, _ = cross_entropy(out, target)
    else:
        loss, _ = mse(out, target)
    return loss


def gradient_check(model: SequenceModel, x: np.ndarray, target: np.ndarray,
                   rng: np.random.Generator,
                   samples_per_tensor: int = SAMPLES_PER_TENSOR,
                   step: float = STEP) -> float:
    """Max relative error between BPTT gradients and central differences.

    Relative error per sampled weight: |ga - gn| / (|ga| + |gn|). Weights
    whose gradients are both below MEASURABLE are held to the ABS_TOL
    absolute bound instead and contribute 0 when they meet it.
    """
    out = model.forward(x)
    if model.kind == "recognizer":
        _, dout = cross_entropy(out, target)
    else:
        _, dout = mse(out, target)
    model.zero_grads()
    model.backward(dout)

    analytic = {k: v.copy() for k, v in model.flat_grads().items()}
    params = model.flat_params()
    worst = 0.0
    for name, p in params.items():
        flat = p.reshape(-1)
        n = flat.size
        count = min(samples_per_tensor, n)
        picks = rng.choice(n, size=count, replace=False)
        for j in picks:
            orig = flat[j]
            flat[j] = orig + step
            up = _loss_only(model, x, target)
            flat[j] = orig - step
            down = _loss_only(model, x, target)
            flat[j] = orig
            gn = (up - down) / (2.0 * step)
            ga = analytic[name].reshape(-1)[j]
            diff = abs(ga - gn)
            if max(abs(ga), abs(gn)) < MEASURABLE and diff <= ABS_TOL:
                continue
            rel = diff / max(abs(ga) + abs(gn), MEASURABLE)
            worst = max(worst, rel)
    return worst
