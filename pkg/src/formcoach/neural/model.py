"""Sequence-model container: an ordered layer stack plus metadata.

Two kinds exist: "recognizer" (class logits from a key-frame stack) and
"forecaster" (next 9-angle vector from a context window). The container
owns normalization constants and quantization state so a model file is
self-describing.
"""

from __future__ import annotations

import numpy as np

from .layers import Layer, build_layer

KINDS = ("recognizer", "forecaster")
FORMAT_VERSION = 1


class SequenceModel:
    def __init__(self, kind: str, layers: list[Layer], input_dim: int,
                 output_dim: int, norm_scale: float = float(np.pi),
                 config: dict | None = None):
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
        self.kind = kind
        self.layers = layers
        self.input_dim = input_dim
        self.output_dim = output_dim
        self.norm_scale = float(norm_scale)
        self.config = dict(config or {})
        # tensor name -> (int8 array, scale); populated by quantization
        self.quant: dict[str, tuple[np.ndarray, float]] = {}

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, dout: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return dout

    def zero_grads(self):
        for layer in self.layers:
            layer.zero_grads()

    def flat_params(self) -> dict[str, np.ndarray]:
        out = {}
        for i, layer in enumerate(self.layers):
            for name, arr in layer.params.items():
                out[f"layers.{i}.{name}"] = arr
        return out

    def flat_grads(self) -> dict[str, np.ndarray]:
        out = {}
        for i, layer in enumerate(self.layers):
            for name, arr in layer.grads.items():
                out[f"layers.{i}.{name}"] = arr
        return out

    def layer_specs(self) -> list[dict]:
        return [layer.spec() for layer in self.layers]

    @property
    def is_quantized(self) -> bool:
        return bool(self.quant)

    def clone_architecture(self, rng: np.random.Generator | None = None
                           ) -> "SequenceModel":
        """Same structure and metadata with freshly initialized weights."""
        layers = [build_layer(s, rng) for s in self.layer_specs()]
        return SequenceModel(self.kind, layers, self.input_dim,
                             self.output_dim, self.norm_scale, self.config)


def assemble(kind: str, layer_specs: list[dict], input_dim: int,
             output_dim: int, norm_scale: float, config: dict,
             rng: np.random.Generator | None = None) -> SequenceModel:
    layers = [build_layer(s, rng) for s in layer_specs]
    return SequenceModel(kind, layers, input_dim, output_dim, norm_scale, config)
