import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from formcoach.corrector import build_forecaster
from formcoach.quantize import (bench, is_bias, quantize_model,
                                quantize_tensor, roundtrip_errors)
from formcoach.recognizer import build_recognizer


def test_quantize_tensor_hand_values():
    # peak 1.27 -> scale 0.01; grid points land exactly
    w = np.array([-1.27, 0.0, 0.635, 1.27])
    q, scale = quantize_tensor(w)
    assert scale == pytest.approx(0.01)
    assert q.dtype == np.int8
    np.testing.assert_array_equal(q, [-127, 0, 64, 127])  # 63.5 rounds to even


def test_quantize_tensor_round_half_even():
    # np.round ties go to even: 0.5 -> 0, 1.5 -> 2
    w = np.array([0.5, 1.5, 127.0])
    q, scale = quantize_tensor(w)
    assert scale == 1.0
    np.testing.assert_array_equal(q, [0, 2, 127])


def test_quantize_tensor_zero_and_nonfinite():
    q, scale = quantize_tensor(np.zeros(5))
    assert scale == 1.0
    np.testing.assert_array_equal(q, np.zeros(5, dtype=np.int8))
    with pytest.raises(ValueError, match="finite"):
        quantize_tensor(np.array([1.0, np.inf]))


@given(hnp.arrays(np.float64, st.integers(1, 30),
                  elements=st.floats(-5, 5, allow_nan=False)))
@settings(max_examples=200, deadline=None)
def test_quantize_roundtrip_error_bound(w):
    q, scale = quantize_tensor(w)
    back = q.astype(float) * scale
    # symmetric per-tensor grid: error never exceeds half a step
    assert np.max(np.abs(w - back)) <= scale / 2 + 1e-15
    assert np.abs(q).max() <= 127


def test_is_bias_names():
    assert is_bias("layers.0.b")
    assert is_bias("layers.2.bo")
    assert not is_bias("layers.0.Wx")
    assert not is_bias("layers.1.Wh")


@pytest.fixture(scope="module")
def recognizer_pair():
    model = build_recognizer(6, ["a", "b"], hidden=16, heads=2, seed=0)
    return model, quantize_model(model)


def test_quantize_model_marks_and_preserves(recognizer_pair):
    model, qmodel = recognizer_pair
    assert not model.is_quantized
    assert qmodel.is_quantized
    src, dst = model.flat_params(), qmodel.flat_params()
    for name in src:
        if is_bias(name):
            np.testing.assert_array_equal(src[name], dst[name])
            assert name not in qmodel.quant
        else:
            assert name in qmodel.quant
            q, scale = qmodel.quant[name]
            assert q.dtype == np.int8
            np.testing.assert_array_equal(dst[name], q.astype(float) * scale)
    # original weights untouched by quantization
    assert not any(np.shares_memory(src[n], dst[n]) for n in src)


def test_roundtrip_errors_within_half_scale(recognizer_pair):
    model, qmodel = recognizer_pair
    errs = roundtrip_errors(model, qmodel)
    assert errs  # at least the weight tensors
    for name, err in errs.items():
        _, scale = qmodel.quant[name]
        assert err <= scale / 2 + 1e-15


def test_quantized_forward_close_not_identical(recognizer_pair):
    model, qmodel = recognizer_pair
    rng = np.random.default_rng(1)
    x = rng.uniform(0, 1, size=(3, 10, 6))
    a, b = model.forward(x), qmodel.forward(x)
    assert a.shape == b.shape
    assert not np.array_equal(a, b)      # quantization noise exists
    np.testing.assert_allclose(a, b, atol=0.5)  # but stays small


def test_quantize_forecaster_roundtrip():
    model = build_forecaster("pose_a", context=5, hidden=8, seed=0)
    qmodel = quantize_model(model)
    errs = roundtrip_errors(model, qmodel)
    for name, err in errs.items():
        _, scale = qmodel.quant[name]
        assert err <= scale / 2 + 1e-15


def test_bench_reports_latency():
    model = build_recognizer(4, ["a", "b"], hidden=8, heads=2, seed=0)
    report = bench(model, (1, 10, 4), iterations=5, warmup=1)
    assert report["iterations"] == 5
    assert report["mean_latency_s"] > 0
    assert report["p95_latency_s"] >= 0
    assert report["throughput_per_s"] == pytest.approx(
        1.0 / report["mean_latency_s"])
    with pytest.raises(ValueError):
        bench(model, (1, 10, 4), iterations=0)
