import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ephoresim import (
    ChannelParams,
    Constant,
    DetectorConfig,
    FrameConfig,
    IndexOutOfRange,
    LengthMismatch,
    NonConvergence,
    all_sample_times,
    decide,
    matched_weights,
    optimize_threshold,
    sample_times,
)
from ephoresim.detection import bit_errors_at, threshold_from_sums
from ephoresim.mcsim import TRAINING_STREAM, weighted_sums


def test_sample_times_align_with_emission_windows(frame):
    np.testing.assert_allclose(sample_times(frame, 1), [2e-5, 4e-5, 6e-5, 8e-5, 1e-4])
    np.testing.assert_allclose(sample_times(frame, 3), 2e-4 + frame.offsets)
    assert all_sample_times(frame).shape == (100, 5)
    for j in (0, 101):
        with pytest.raises(IndexOutOfRange):
            sample_times(frame, j)


def test_explicit_sampling_interval():
    f = FrameConfig(M=3, t_s=1e-5)
    np.testing.assert_allclose(f.offsets, [1e-5, 2e-5, 3e-5])
    with pytest.raises(ValueError):
        FrameConfig(M=0)


def test_matched_weights(ch, frame, reference_fields):
    for p in reference_fields.values():
        w = matched_weights(ch, p, frame)
        assert w.shape == (5,) and np.all(w > 0)
    # the sinusoid's template decays from the first sample (t1 is before sample 3)
    w_sin = matched_weights(ch, reference_fields["sinusoidal"], frame)
    np.testing.assert_allclose(w_sin - ch.noise_mean, [26.5, 14.7, 8.0, 5.1, 2.9], rtol=0.02)
    assert int(np.argmax(w_sin)) == 0
    # constant field crosses the receiver at x0/v = 5e-5 s, nearest sample m = 2 (4e-5 s)
    assert int(np.argmax(matched_weights(ch, reference_fields["constant"], frame))) == 1


def test_pilot_weights_include_interference(ch, frame, reference_fields):
    p = reference_fields["constant"]
    assert np.all(matched_weights(ch, p, frame, "pilot") >= matched_weights(ch, p, frame) - 1e-12)
    with pytest.raises(ValueError):
        matched_weights(ch, p, frame, "bogus")


def test_decide_examples():
    d = DetectorConfig((1, 2, 3, 2, 1), 6.0)
    assert decide([0, 1, 0, 2, 0], d) == 1
    assert decide([0, 0, 0, 0, 0], d) == 0
    assert decide([0, 0, 0, 0, 0], DetectorConfig((1, 2, 3, 2, 1), 0.0)) == 1
    np.testing.assert_array_equal(decide([[0, 1, 0, 2, 0], [0, 0, 0, 0, 0]], d), [1, 0])
    with pytest.raises(LengthMismatch):
        decide([1, 2, 3], d)


@settings(max_examples=100, deadline=None)
@given(
    obs=st.lists(st.integers(0, 50), min_size=4, max_size=4),
    w=st.lists(st.floats(0.01, 100), min_size=4, max_size=4),
    gamma=st.floats(0, 1e4),
    c=st.floats(1e-3, 1e3),
)
def test_decide_properties(obs, w, gamma, c):
    d = DetectorConfig(tuple(w), gamma)
    # scale equivariance
    scaled = DetectorConfig(tuple(c * x for x in w), c * gamma)
    s = float(np.dot(obs, w))
    if abs(s - gamma) > 1e-9 * max(s, gamma, 1.0):
        assert decide(obs, scaled) == decide(obs, d)
    # monotone in gamma and inclusive at the boundary
    assert decide(obs, DetectorConfig(tuple(w), gamma * 2 + 1)) <= decide(obs, d)
    assert decide(obs, DetectorConfig(tuple(w), s)) == 1


def test_bit_errors_at_counts():
    s1 = np.array([1.0, 3.0, 5.0])
    s0 = np.array([0.0, 2.0, 4.0])
    np.testing.assert_array_equal(bit_errors_at([0.0, 2.5, 6.0], s1, s0), [3, 2, 3])


def test_threshold_from_sums_flat_raises():
    with pytest.raises(NonConvergence):
        threshold_from_sums(np.zeros(10), np.array([0, 1] * 5))


def test_threshold_from_sums_separable():
    sums = np.array([1.0, 2.0, 3.0, 10.0, 11.0, 12.0])
    bits = np.array([0, 0, 0, 1, 1, 1])
    g = threshold_from_sums(sums, bits)
    assert 3.0 < g <= 10.0


def test_optimize_threshold_near_exhaustive_grid(ch, frame):
    p = Constant(0.01)
    g = optimize_threshold(ch, p, frame, 1000, 11)
    w = matched_weights(ch, p, frame)
    sums, bits = weighted_sums(ch, p, frame, w, 1000, 11, stream=TRAINING_STREAM)
    s1, s0 = np.sort(sums[bits == 1]), np.sort(sums[bits == 0])
    fine = np.linspace(0, sums.max(), 20001)
    best = bit_errors_at(fine, s1, s0).min()
    got = int(bit_errors_at(g, s1, s0))
    n = sums.size
    sigma = math.sqrt(max(best, 1) * (1 - best / n))
    assert got <= best + 2 * sigma
    # deterministic and scale equivariant
    assert optimize_threshold(ch, p, frame, 1000, 11) == g
    g2 = optimize_threshold(ch, p, frame, 1000, 11, weights=2 * w)
    sums2 = 2 * sums
    np.testing.assert_array_equal(sums2 >= g2, sums >= g2 / 2)
    assert int(bit_errors_at(g2 / 2, s1, s0)) <= best + 2 * sigma


def test_optimize_threshold_degenerate_channel(frame):
    ch = ChannelParams(N_EM=0.0)
    p = Constant(0.01)
    try:
        g = optimize_threshold(ch, p, frame, 1000, 2)
    except NonConvergence:
        return
    w = matched_weights(ch, p, frame)
    sums, bits = weighted_sums(ch, p, frame, w, 1000, 3)
    n = sums.size
    ber = np.count_nonzero((sums >= g) != bits.astype(bool)) / n
    assert ber >= 0.5 - 3 * math.sqrt(0.25 / n)


def test_optimize_threshold_needs_enough_trials(ch, frame):
    with pytest.raises(ValueError):
        optimize_threshold(ch, Constant(0.01), frame, 999, 0)
