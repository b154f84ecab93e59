"""Monte Carlo bit-error-rate estimation at the Poisson-count level.

Each trial draws a bit sequence, turns it into per-sample mean counts with a
precomputed emission kernel, draws independent Poisson observations and
decodes every interval with the weighted-sum detector.

Randomness is organised in per-trial streams: trial ``i`` of stream ``s``
owns ``Philox(SeedSequence(seed, spawn_key=(s, i)))``. Results therefore do
not depend on how trials are distributed over worker threads.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from .channel import BitSequence, ChannelParams, expected_count_uniform
from .detection import DetectorConfig, FrameConfig, WeightsMode, all_sample_times, matched_weights, optimize_threshold
from .errors import InvalidMean, LengthMismatch
from .field import VelocityProfile

__all__ = [
    "SimulationConfig",
    "BerReport",
    "generate_sequence",
    "simulate_observations",
    "emission_kernel",
    "trial_rng",
    "weighted_sums",
    "estimate_ber",
    "confidence_halfwidth",
    "CSV_COLUMNS",
]

SCORING_STREAM = 0
TRAINING_STREAM = 1
CHUNK = 250
Z95 = 1.959963984540054

CSV_COLUMNS = ("field_variant", "xi_v", "T_int", "M", "trials", "seed", "gamma", "ber", "ci95")


def default_threads() -> int:
    env = os.environ.get("EPHORESIM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def trial_rng(seed: int, stream: int, trial: int) -> np.random.Generator:
    """Counter-based generator owned by one trial of one stream."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(trial)))
    return np.random.Generator(np.random.Philox(ss))


def generate_sequence(B: int, P1: float, rng: np.random.Generator) -> BitSequence:
    if not 0.0 <= P1 <= 1.0:
        raise ValueError(f"P1 must lie in [0, 1], got {P1}")
    return BitSequence(tuple((rng.random(B) < P1).astype(int)))


def simulate_observations(means, rng: np.random.Generator) -> np.ndarray:
    """Independent Poisson counts, one per mean."""
    lam = np.asarray(means, dtype=float)
    if np.any(~np.isfinite(lam)) or np.any(lam < 0):
        raise InvalidMean("Poisson means must be finite and non-negative")
    return rng.poisson(lam)


def emission_kernel(
    ch: ChannelParams,
    p: VelocityProfile,
    frame: FrameConfig,
    isi_window: int | None = None,
) -> np.ndarray:
    """Mean contribution of each emission to each sample, shape ``(B, B*M)``.

    Row ``k`` holds the expected count at every sampling instant due to a
    lone emission at ``k * T_int``; entries before the emission are zero.
    Mean counts of a trial are ``noise_mean + bits @ kernel``.
    """
    times = all_sample_times(frame).ravel()
    t0 = np.arange(frame.B)[:, None] * frame.T_int
    K = np.asarray(expected_count_uniform(ch, p, times[None, :], t0))
    if isi_window is not None:
        slot = np.repeat(np.arange(frame.B), frame.M)[None, :]
        K = np.where(slot - np.arange(frame.B)[:, None] < isi_window, K, 0.0)
    return K


@dataclass(frozen=True)
class SimulationConfig:
    """Everything :func:`estimate_ber` needs.

    ``detector=None`` selects the matched weights (``weights_mode``) and a
    threshold optimised on a separate training stream. ``sequence`` fixes
    the transmitted bits for every trial instead of drawing fresh ones.
    ``metadata`` is echoed into the report.
    """

    channel: ChannelParams
    profile: VelocityProfile
    frame: FrameConfig
    detector: DetectorConfig | None = None
    trials: int = 10_000
    seed: int = 0
    sequence: BitSequence | None = None
    weights_mode: WeightsMode = "template"
    isi_window: int | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials}")
        if self.sequence is not None and len(self.sequence) != self.frame.B:
            raise LengthMismatch(f"fixed sequence has {len(self.sequence)} bits, frame has B={self.frame.B}")
        if self.detector is not None and self.detector.M != self.frame.M:
            raise LengthMismatch(f"detector has {self.detector.M} weights, frame has M={self.frame.M}")


@dataclass(frozen=True)
class BerReport:
    ber: float
    bit_errors: int
    bits_total: int
    ci_halfwidth_95: float
    gamma_used: float
    weights: tuple[float, ...]
    gamma_optimized: bool
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def csv_row(self) -> dict[str, Any]:
        md = self.metadata
        return {
            "field_variant": md.get("field_variant", ""),
            "xi_v": md.get("xi_v", ""),
            "T_int": md.get("T_int", ""),
            "M": md.get("M", ""),
            "trials": md.get("trials", ""),
            "seed": md.get("seed", ""),
            "gamma": self.gamma_used,
            "ber": self.ber,
            "ci95": self.ci_halfwidth_95,
        }


def confidence_halfwidth(errors: int, n: int, z: float = Z95) -> float:
    """95% half-width: normal approximation, Wilson score below 30 errors."""
    if n <= 0:
        return math.nan
    p = errors / n
    if errors >= 30:
        return z * math.sqrt(p * (1.0 - p) / n)
    denom = 1.0 + z * z / n
    return z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom


def _run_chunk(start, stop, *, seed, stream, kernel, noise, frame, sequence, weights):
    B, M = frame.B, frame.M
    sums = np.empty((stop - start, B))
    bits_out = np.empty((stop - start, B), dtype=np.int8)
    rngs = [trial_rng(seed, stream, i) for i in range(start, stop)]
    if sequence is None:
        bits = np.stack([(r.random(B) < frame.P1) for r in rngs]).astype(np.int8)
    else:
        bits = np.broadcast_to(sequence.as_array(), (stop - start, B))
    means = noise + bits.astype(float) @ kernel
    for row, r in enumerate(rngs):
        obs = r.poisson(means[row]).reshape(B, M)
        sums[row] = obs @ weights
    bits_out[:] = bits
    return sums, bits_out


def weighted_sums(
    ch: ChannelParams,
    p: VelocityProfile,
    frame: FrameConfig,
    weights: Sequence[float],
    trials: int,
    seed: int,
    *,
    stream: int = SCORING_STREAM,
    sequence: BitSequence | None = None,
    isi_window: int | None = None,
    threads: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted sums and transmitted bits for ``trials`` independent frames.

    Returns two ``(trials, B)`` arrays. Trials are processed in fixed-size
    chunks on a thread pool; the output is identical for any thread count.
    """
    kernel = emission_kernel(ch, p, frame, isi_window)
    w = np.asarray(weights, dtype=float)
    if w.shape != (frame.M,):
        raise LengthMismatch(f"expected {frame.M} weights, got {w.shape}")
    bounds = [(a, min(a + CHUNK, trials)) for a in range(0, trials, CHUNK)]
    kw = dict(seed=seed, stream=stream, kernel=kernel, noise=ch.noise_mean,
              frame=frame, sequence=sequence, weights=w)
    n_threads = threads or default_threads()
    if n_threads == 1 or len(bounds) == 1:
        parts = [_run_chunk(a, b, **kw) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            parts = list(pool.map(lambda ab: _run_chunk(*ab, **kw), bounds))
    sums = np.concatenate([s for s, _ in parts])
    bits = np.concatenate([b for _, b in parts])
    return sums, bits


def estimate_ber(cfg: SimulationConfig, *, threads: int | None = None) -> BerReport:
    """Monte Carlo BER over ``cfg.trials`` frames of ``cfg.frame.B`` bits.

    Threshold-search failures (:class:`~ephoresim.errors.NonConvergence`)
    propagate to the caller.
    """
    ch, p, frame = cfg.channel, cfg.profile, cfg.frame
    if cfg.detector is None:
        weights = matched_weights(ch, p, frame, cfg.weights_mode)
        gamma = optimize_threshold(
            ch, p, frame, max(cfg.trials, 1000), cfg.seed,
            weights=weights, sequence=cfg.sequence, isi_window=cfg.isi_window, threads=threads,
        )
        optimized = True
    else:
        weights = np.asarray(cfg.detector.weights)
        gamma = cfg.detector.gamma
        optimized = False

    sums, bits = weighted_sums(
        ch, p, frame, weights, cfg.trials, cfg.seed,
        stream=SCORING_STREAM, sequence=cfg.sequence, isi_window=cfg.isi_window, threads=threads,
    )
    decided = sums >= gamma
    errors = int(np.count_nonzero(decided != bits.astype(bool)))
    n = int(bits.size)
    meta = {"trials": cfg.trials, "seed": cfg.seed, "T_int": frame.T_int, "M": frame.M,
            "B": frame.B, "P1": frame.P1, "field_variant": p.variant,
            "profile": p.to_dict(), "weights_mode": cfg.weights_mode,
            "fixed_sequence": cfg.sequence is not None}
    meta.update(cfg.metadata)
    return BerReport(
        ber=errors / n,
        bit_errors=errors,
        bits_total=n,
        ci_halfwidth_95=confidence_halfwidth(errors, n),
        gamma_used=float(gamma),
        weights=tuple(float(x) for x in weights),
        gamma_optimized=optimized,
        metadata=meta,
    )
