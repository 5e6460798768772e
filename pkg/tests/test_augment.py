import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formcoach.augment import (noise_augment, plausibility_envelope,
                               shift_augment)
from formcoach.sequence import PoseSequence


def seq_of(values, pose_class="a"):
    values = np.asarray(values, dtype=float)
    return PoseSequence(values=values, times=np.arange(len(values), dtype=float),
                        pose_class=pose_class)


def test_envelope_widens_by_ten_percent_of_range():
    arrs = [np.array([[0.5], [1.0]]), np.array([[0.75], [1.5]])]
    lo, hi = plausibility_envelope(arrs)
    assert lo[0] == pytest.approx(0.5 - 0.1 * 1.0)
    assert hi[0] == pytest.approx(1.5 + 0.1 * 1.0)


def test_envelope_clamps_to_angle_domain():
    arrs = [np.array([[0.001, 2.0], [0.05, np.pi - 0.001]])]
    lo, hi = plausibility_envelope(arrs)
    assert lo[0] == 0.0  # 0.001 - 10% of span dips below zero
    assert hi[1] == np.pi


def test_envelope_ignores_nan():
    arrs = [np.array([[0.5], [np.nan], [1.5]])]
    lo, hi = plausibility_envelope(arrs)
    assert lo[0] == pytest.approx(0.4) and hi[0] == pytest.approx(1.6)


def test_noise_std_tracks_per_angle_std():
    # Monte Carlo: the added noise's std approximates scale * sigma_j
    rng = np.random.default_rng(0)
    t = np.linspace(0, 6 * np.pi, 400)
    vals = np.stack([1.5 + 0.8 * np.sin(t), 1.0 + 0.05 * np.cos(t)], axis=1)
    seq = seq_of(vals)
    wide = (np.zeros(2), np.full(2, np.pi))  # disable clamping for the estimate
    copies = noise_augment(seq, 250, rng, scale=0.1, envelope=wide)
    col_std = vals.std(axis=0, ddof=1)
    added = np.stack([c.values - vals for c in copies])
    got = added.std(axis=(0, 1), ddof=1)
    np.testing.assert_allclose(got, 0.1 * col_std, rtol=0.1)


def test_noise_means_stay_centered():
    rng = np.random.default_rng(4)
    vals = np.full((300, 3), 1.2)
    vals += np.linspace(0, 0.5, 300)[:, None]
    copies = noise_augment(seq_of(vals), 50, rng,
                           envelope=(np.zeros(3), np.full(3, np.pi)))
    added = np.stack([c.values - vals for c in copies])
    assert np.abs(added.mean()) < 1e-3


def test_zero_variance_angle_unchanged():
    vals = np.stack([np.full(60, 0.7), np.linspace(0.5, 1.5, 60)], axis=1)
    rng = np.random.default_rng(1)
    (copy,) = noise_augment(seq_of(vals), 1, rng)
    np.testing.assert_array_equal(copy.values[:, 0], vals[:, 0])
    assert not np.array_equal(copy.values[:, 1], vals[:, 1])


def test_missing_entries_stay_missing():
    vals = np.linspace(0.4, 2.0, 30)[:, None].repeat(2, axis=1)
    vals[7, 0] = np.nan
    rng = np.random.default_rng(2)
    (copy,) = noise_augment(seq_of(vals), 1, rng)
    assert np.isnan(copy.values[7, 0])
    assert np.isfinite(copy.values[7, 1])


def test_envelope_fuzz_bounds_hold():
    rng = np.random.default_rng(3)
    vals = rng.uniform(0.3, 2.8, size=(1000, 5))
    seq = seq_of(vals)
    env = plausibility_envelope([vals])
    for copy in noise_augment(seq, 100, rng, scale=1.0, envelope=env):
        assert np.all(copy.values >= env[0]) and np.all(copy.values <= env[1])


def test_noise_augment_reproducible_under_seed():
    vals = np.linspace(0.2, 2.2, 50)[:, None]
    a = noise_augment(seq_of(vals), 3, np.random.default_rng(42))
    b = noise_augment(seq_of(vals), 3, np.random.default_rng(42))
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.values, y.values)


def test_noise_augment_validation():
    seq = seq_of(np.zeros((10, 1)))
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        noise_augment(seq, 0, rng)
    with pytest.raises(ValueError):
        noise_augment(seq, 1, rng, scale=0.0)
    with pytest.raises(ValueError):
        noise_augment(seq, 1, rng, scale=1.5)


def test_shift_produces_early_and_late_variants():
    vals = np.arange(10, dtype=float)[:, None] / 10
    early, late = shift_augment(seq_of(vals), [3, 4, 5])
    np.testing.assert_array_equal(early.values[:, 0], [0.2, 0.3, 0.4])
    np.testing.assert_array_equal(late.values[:, 0], [0.4, 0.5, 0.6])
    np.testing.assert_array_equal(early.times, [2, 3, 4])


def test_shift_clamps_and_collapses_at_bounds():
    vals = np.arange(5, dtype=float)[:, None]
    early, late = shift_augment(seq_of(vals), [0, 1, 4])
    # -1 shift: {-1, 0, 3} -> clamp {0, 0, 3} -> {0, 3}
    np.testing.assert_array_equal(early.values[:, 0], [0, 3])
    # +1 shift: {1, 2, 5} -> clamp {1, 2, 4}
    np.testing.assert_array_equal(late.values[:, 0], [1, 2, 4])


def test_shift_copies_rows_verbatim():
    rng = np.random.default_rng(5)
    vals = rng.uniform(0, np.pi, size=(12, 4))
    for variant in shift_augment(seq_of(vals), np.arange(12)):
        for row in variant.values:
            assert any((row == v).all() for v in vals)


def test_shift_validation():
    seq = seq_of(np.zeros((10, 1)))
    with pytest.raises(ValueError):
        shift_augment(seq_of(np.zeros((2, 1))), [0])
    with pytest.raises(ValueError):
        shift_augment(seq, [])
    with pytest.raises(ValueError):
        shift_augment(seq, [10])
    with pytest.raises(ValueError):
        shift_augment(seq, [-1])


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=3, max_value=30), st.data())
def test_shift_properties(n, data):
    idx = data.draw(st.lists(st.integers(min_value=0, max_value=n - 1),
                             min_size=1, max_size=n, unique=True))
    seq = seq_of(np.arange(n, dtype=float)[:, None])
    for variant in shift_augment(seq, idx):
        assert 1 <= len(variant) <= len(idx)
        assert np.all(np.diff(variant.times) > 0)  # strictly ordered subsequence
