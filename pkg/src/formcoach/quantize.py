"""Weight-only INT8 quantization and a small inference benchmark.

Per-tensor symmetric scheme: scale = max|w| / 127, q = round(w / scale)
with round-half-to-even, clamped to [-127, 127]. Biases stay double, and
activations stay double throughout; quantized weights are dequantized as
q * scale for the forward pass, which reproduces the accuracy-loss
experiment without integer recurrent arithmetic.
"""

from __future__ import annotations

import time

import numpy as np

from .neural import SequenceModel

QMAX = 127


def is_bias(name: str) -> bool:
    return name.rsplit(".", 1)[-1].startswith("b")


def quantize_tensor(w: np.ndarray) -> tuple[np.ndarray, float]:
    if not np.all(np.isfinite(w)):
        raise ValueError("non-finite weights cannot be quantized")
    peak = float(np.max(np.abs(w))) if w.size else 0.0
    scale = peak / QMAX if peak > 0 else 1.0
    q = np.clip(np.round(w / scale), -QMAX, QMAX).astype(np.int8)
    return q, scale


def quantize_model(model: SequenceModel) -> SequenceModel:
    """INT8 copy of a trained model; the input model is untouched."""
    out = model.clone_architecture()
    src = model.flat_params()
    dst = out.flat_params()
    for name, w in src.items():
        if is_bias(name):
            dst[name][...] = w
            continue
        q, scale = quantize_tensor(w)
        dst[name][...] = q.astype(np.float64) * scale
        out.quant[name] = (q, scale)
    return out


def roundtrip_errors(model: SequenceModel, quantized: SequenceModel
                     ) -> dict[str, float]:
    """Max |w - q*scale| per quantized tensor, for the scale/2 bound."""
    src = model.flat_params()
    dst = quantized.flat_params()
    return {name: float(np.max(np.abs(src[name] - dst[name])))
            for name in quantized.quant}


def accuracy_delta(model: SequenceModel, quantized: SequenceModel,
                   test_sequences) -> dict:
    """Metric before/after quantization on one test set.

    Recognizer: accuracy and the drop in points. Forecaster: MSE and the
    inflation ratio.
    """
    if not test_sequences:
        raise ValueError("empty test set")
    if model.kind == "recognizer":
        from .recognizer import evaluate
        before = evaluate(model, test_sequences).accuracy
        after = evaluate(quantized, test_sequences).accuracy
        return {"kind": "recognizer", "before": before, "after": after,
                "delta_points": 100.0 * (before - after)}
    from .corrector import forecaster_mse
    before = forecaster_mse(model, test_sequences)
    after = forecaster_mse(quantized, test_sequences)
    return {"kind": "forecaster", "before": before, "after": after,
            "ratio": after / before if before > 0 else float("inf")}


def bench(model: SequenceModel, input_shape: tuple, iterations: int,
          warmup: int = 3) -> dict:
    """Single-threaded wall-clock throughput for one input shape."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    rng = np.random.default_rng(0)
    x = rng.uniform(0.0, 1.0, size=input_shape)
    for _ in range(warmup):
        model.forward(x)
    samples = []
    for _ in range(iterations):
        t0 = time.perf_counter()
        model.forward(x)
        samples.append(time.perf_counter() - t0)
    samples = np.array(samples)
    return {
        "iterations": iterations,
        "mean_latency_s": float(samples.mean()),
        "p95_latency_s": float(np.percentile(samples, 95)),
        "throughput_per_s": float(1.0 / samples.mean()),
    }
