import numpy as np
import pytest

from formcoach.neural import (LSTM, Dense, MeanPool, SequenceModel,
                              load_model, save_model)
from formcoach.quantize import quantize_model


def small_model(seed=0):
    r = np.random.default_rng(seed)
    layers = [LSTM(4, 6, r), MeanPool(), Dense(6, 3, r)]
    return SequenceModel("recognizer", layers, 4, 3,
                         config={"labels": ["a", "b", "c"], "k": 5})


def test_roundtrip_preserves_everything(tmp_path):
    model = small_model()
    p = tmp_path / "m.fcm"
    save_model(model, p)
    back = load_model(p)
    assert back.kind == model.kind
    assert back.input_dim == model.input_dim
    assert back.output_dim == model.output_dim
    assert back.norm_scale == model.norm_scale
    assert back.config == model.config
    for k, v in model.flat_params().items():
        np.testing.assert_array_equal(back.flat_params()[k], v)


def test_roundtrip_preserves_forward_outputs(tmp_path):
    model = small_model(1)
    x = np.random.default_rng(2).uniform(0, 1, size=(3, 5, 4))
    p = tmp_path / "m.fcm"
    save_model(model, p)
    np.testing.assert_array_equal(load_model(p).forward(x), model.forward(x))


def test_save_is_byte_deterministic(tmp_path):
    model = small_model(3)
    a, b = tmp_path / "a.fcm", tmp_path / "b.fcm"
    save_model(model, a)
    save_model(model, b)
    assert a.read_bytes() == b.read_bytes()


def test_quantized_roundtrip_is_exact(tmp_path):
    q = quantize_model(small_model(4))
    p = tmp_path / "q.fcm"
    save_model(q, p)
    back = load_model(p)
    assert back.is_quantized
    assert set(back.quant) == set(q.quant)
    for k, v in q.flat_params().items():
        # int8 weights reconstruct to identical dequantized doubles
        np.testing.assert_array_equal(back.flat_params()[k], v)
    for k in q.quant:
        np.testing.assert_array_equal(back.quant[k][0], q.quant[k][0])
        assert back.quant[k][1] == q.quant[k][1]


def test_bad_magic_rejected(tmp_path):
    p = tmp_path / "junk.fcm"
    p.write_bytes(b"NOTMODEL" + b"\x00" * 64)
    with pytest.raises(ValueError, match="magic"):
        load_model(p)


def test_truncated_file_rejected(tmp_path):
    model = small_model(5)
    p = tmp_path / "m.fcm"
    save_model(model, p)
    raw = p.read_bytes()
    p.write_bytes(raw[:len(raw) - 16])
    with pytest.raises(ValueError):
        load_model(p)


def test_trailing_garbage_rejected(tmp_path):
    model = small_model(6)
    p = tmp_path / "m.fcm"
    save_model(model, p)
    p.write_bytes(p.read_bytes() + b"extra")
    with pytest.raises(ValueError, match="trailing"):
        load_model(p)
