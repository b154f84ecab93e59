import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ephoresim import (
    BitSequence,
    ChannelParams,
    Constant,
    DetectorConfig,
    FrameConfig,
    InvalidMean,
    LengthMismatch,
    SimulationConfig,
    estimate_ber,
    expected_signal,
    generate_sequence,
    simulate_observations,
)
from ephoresim.detection import all_sample_times
from ephoresim.mcsim import CSV_COLUMNS, confidence_halfwidth, emission_kernel, trial_rng, weighted_sums


def test_poisson_sampler():
    rng = np.random.default_rng(0)
    assert np.all(simulate_observations(np.zeros(100), rng) == 0)
    draws = simulate_observations(np.full(10_000, 1e6), rng)
    assert abs(draws.mean() - 1e6) < 3 * math.sqrt(1e6 / 1e4)
    with pytest.raises(InvalidMean):
        simulate_observations([1.0, -0.5], rng)
    with pytest.raises(InvalidMean):
        simulate_observations([np.nan], rng)


def test_generate_sequence():
    bits = generate_sequence(10_000, 0.3, trial_rng(1, 0, 0))
    assert len(bits) == 10_000
    assert abs(bits.as_array().mean() - 0.3) < 0.02
    assert generate_sequence(5, 0.0, trial_rng(1, 0, 0)).bits == (0,) * 5


def test_trial_streams_are_independent_and_reproducible():
    a = trial_rng(5, 0, 7).random(4)
    np.testing.assert_array_equal(a, trial_rng(5, 0, 7).random(4))
    assert not np.array_equal(a, trial_rng(5, 1, 7).random(4))
    assert not np.array_equal(a, trial_rng(5, 0, 8).random(4))


def test_emission_kernel_matches_expected_signal(ch, reference_fields):
    frame = FrameConfig(B=12)
    p = reference_fields["sinusoidal"]
    bits = np.array([0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0])
    K = emission_kernel(ch, p, frame)
    assert K.shape == (12, 60)
    means = ch.noise_mean + bits @ K
    direct = expected_signal(ch, p, frame.T_int, bits, all_sample_times(frame).ravel())
    np.testing.assert_allclose(means, direct, rtol=1e-12)
    # all-zero sequence leaves only the noise mean
    np.testing.assert_array_equal(ch.noise_mean + np.zeros(12) @ K, 1.0)


def test_emission_kernel_isi_window(ch, reference_fields):
    frame = FrameConfig(B=6)
    p = reference_fields["constant"]
    K = emission_kernel(ch, p, frame, isi_window=1)
    full = emission_kernel(ch, p, frame)
    for k in range(6):
        block = slice(5 * k, 5 * k + 5)
        np.testing.assert_array_equal(K[k, block], full[k, block])
        assert np.all(np.delete(K[k], np.arange(5 * k, 5 * k + 5)) == 0)


def test_confidence_halfwidth():
    # normal approximation at >= 30 errors
    assert confidence_halfwidth(100, 10_000) == pytest.approx(1.96 * math.sqrt(0.01 * 0.99 / 1e4), rel=1e-3)
    # Wilson below 30 errors stays positive at zero errors
    assert 0 < confidence_halfwidth(0, 1_000_000) < 5e-6
    assert math.isnan(confidence_halfwidth(0, 0))


def test_report_serialisation(ch, frame):
    r = estimate_ber(SimulationConfig(ch, Constant(0.01), frame, trials=1000, seed=2))
    d = json.loads(r.to_json())
    assert d["bits_total"] == 100_000 and d["gamma_optimized"]
    row = r.csv_row()
    assert tuple(row) == CSV_COLUMNS
    assert row["field_variant"] == "constant" and row["trials"] == 1000 and row["M"] == 5


def test_fixed_sequence_and_explicit_detector(ch):
    frame = FrameConfig(B=7)
    bits = BitSequence((0, 1, 1, 0, 0, 1, 0))
    p = Constant(0.01)
    cfg = SimulationConfig(ch, p, frame, DetectorConfig((1, 1, 1, 1, 1), 1e9), trials=50, seed=0, sequence=bits)
    r = estimate_ber(cfg)
    # threshold above any possible sum: every 1 is missed
    assert r.bit_errors == 50 * 3 and not r.gamma_optimized
    with pytest.raises(LengthMismatch):
        SimulationConfig(ch, p, FrameConfig(B=8), sequence=bits)
    with pytest.raises(LengthMismatch):
        SimulationConfig(ch, p, frame, DetectorConfig((1, 1), 1.0))
    with pytest.raises(ValueError):
        SimulationConfig(ch, p, frame, trials=0)


def test_weighted_sums_independent_of_thread_count(ch, frame, reference_fields):
    p = reference_fields["optimized"]
    w = np.ones(5)
    a = weighted_sums(ch, p, frame, w, 600, 9, threads=1)
    b = weighted_sums(ch, p, frame, w, 600, 9, threads=3)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


def test_ber_report_deterministic_across_threads(ch, frame, reference_fields):
    cfg = SimulationConfig(ch, reference_fields["sinusoidal_pi"], frame, trials=1000, seed=4)
    assert estimate_ber(cfg, threads=1) == estimate_ber(cfg, threads=4)


def test_more_molecules_lower_ber(frame, reference_fields):
    p = reference_fields["sinusoidal_pi"]
    lo = estimate_ber(SimulationConfig(ChannelParams(N_EM=1e4), p, frame, trials=1000, seed=4))
    hi = estimate_ber(SimulationConfig(ChannelParams(N_EM=1e8), p, frame, trials=1000, seed=4))
    assert lo.ber > 0.005
    assert hi.ber < lo.ber


def test_zero_signal_cannot_beat_guessing(frame):
    r = estimate_ber(SimulationConfig(ChannelParams(N_EM=0.0), Constant(0.01), frame, trials=1000, seed=4))
    sigma = math.sqrt(0.25 / r.bits_total)
    assert r.ber >= 0.5 - 3 * sigma


def test_trials_are_exchangeable(ch, frame, reference_fields):
    p = reference_fields["sinusoidal_pi"]
    # share one threshold so only the randomness differs
    base = estimate_ber(SimulationConfig(ch, p, frame, trials=1000, seed=1))
    d = DetectorConfig(base.weights, base.gamma_used)
    r1 = estimate_ber(SimulationConfig(ch, p, frame, d, trials=1000, seed=11))
    r2 = estimate_ber(SimulationConfig(ch, p, frame, d, trials=1000, seed=12))
    big = estimate_ber(SimulationConfig(ch, p, frame, d, trials=2000, seed=13))
    pooled = (r1.bit_errors + r2.bit_errors) / (r1.bits_total + r2.bits_total)
    sigma = math.sqrt(big.ber * (1 - big.ber) / big.bits_total) * math.sqrt(2)
    assert abs(pooled - big.ber) < 3 * sigma


@settings(max_examples=25, deadline=None)
@given(errors=st.integers(0, 10_000), n=st.integers(1, 10_000))
def test_halfwidth_bounded(errors, n):
    errors = min(errors, n)
    h = confidence_halfwidth(errors, n)
    assert 0 <= h <= 1
