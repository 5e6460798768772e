"""Versioned binary model container.

Layout (documented byte-exact in docs/MODEL_FORMAT.md):

    bytes 0..7    magic b"FCMODEL1"
    bytes 8..11   header length n, uint32 little-endian
    bytes 12..12+n  UTF-8 JSON header, keys sorted, compact separators
    remainder     tensor payloads, concatenated in header order

Each tensor entry names its dtype: "f8" (little-endian float64, C order)
or "i8" (int8 quantized weights with a "scale" field; value = q * scale).
Identical models serialize to identical bytes, which the determinism
acceptance check relies on.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import FORMAT_VERSION, SequenceModel, assemble

MAGIC = b"FCMODEL1"


def save_model(model: SequenceModel, path) -> None:
    tensors = []
    blobs = []
    for name, arr in model.flat_params().items():
        if name in model.quant:
            q, scale = model.quant[name]
            tensors.append({"dtype": "i8", "name": name, "scale": float(scale),
                            "shape": list(q.shape)})
            blobs.append(q.astype(np.int8).tobytes(order="C"))
        else:
            tensors.append({"dtype": "f8", "name": name,
                            "shape": list(arr.shape)})
            blobs.append(arr.astype("<f8").tobytes(order="C"))
    header = {
        "config": model.config,
        "format_version": FORMAT_VERSION,
        "input_dim": model.input_dim,
        "kind": model.kind,
        "layers": model.layer_specs(),
        "norm_scale": model.norm_scale,
        "output_dim": model.output_dim,
        "tensors": tensors,
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.uint32(len(head)).tobytes())
        fh.write(head)
        for blob in blobs:
            fh.write(blob)


def load_model(path) -> SequenceModel:
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise ValueError(f"{path}: not a model file (bad magic)")
    head_len = int(np.frombuffer(raw[8:12], dtype="<u4")[0])
    header = json.loads(raw[12:12 + head_len].decode())
    if header["format_version"] != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version "
                         f"{header['format_version']}")
    model = assemble(header["kind"], header["layers"], header["input_dim"],
                     header["output_dim"], header["norm_scale"],
                     header["config"])
    params = model.flat_params()
    offset = 12 + head_len
    for entry in header["tensors"]:
        name = entry["name"]
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        if name not in params:
            raise ValueError(f"{path}: tensor {name!r} not in architecture")
        if entry["dtype"] == "f8":
            arr = np.frombuffer(raw, dtype="<f8", count=size, offset=offset)
            offset += size * 8
            params[name][...] = arr.reshape(shape)
        elif entry["dtype"] == "i8":
            q = np.frombuffer(raw, dtype=np.int8, count=size, offset=offset)
            offset += size
            q = q.reshape(shape).copy()
            scale = float(entry["scale"])
            params[name][...] = q.astype(np.float64) * scale
            model.quant[name] = (q, scale)
        else:
            raise ValueError(f"{path}: unknown tensor dtype {entry['dtype']!r}")
    if offset != len(raw):
        raise ValueError(f"{path}: {len(raw) - offset} trailing bytes")
    return model
