"""Sampling schedule, matched-filter weights and the weighted-sum decision rule.

The receiver takes ``M`` samples per bit interval. Samples of interval ``j``
(1-based) are taken at ``(j - 1) * T_int + m * t_s`` for ``m = 1..M``, so each
decision only looks at the interval whose emission it decodes. A bit is
declared 1 when ``sum_m w_m * s_m >= gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .channel import ChannelParams, expected_count_uniform, expected_signal
from .errors import IndexOutOfRange, LengthMismatch, NonConvergence
from .field import VelocityProfile

__all__ = [
    "FrameConfig",
    "DetectorConfig",
    "sample_times",
    "all_sample_times",
    "matched_weights",
    "decide",
    "bit_errors_at",
    "threshold_from_sums",
    "optimize_threshold",
]

WeightsMode = Literal["template", "pilot"]

GRID_POINTS = 512
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FrameConfig:
    """Modulation and timing. ``t_s`` defaults to ``T_int / M``."""

    T_int: float = 1e-4
    B: int = 100
    P1: float = 0.5
    M: int = 5
    t_s: float | None = None

    def __post_init__(self):
        if not self.T_int > 0:
            raise ValueError(f"T_int must be positive, got {self.T_int}")
        if int(self.B) != self.B or self.B < 1:
            raise ValueError(f"B must be a positive integer, got {self.B}")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M}")
        if not 0.0 <= self.P1 <= 1.0:
            raise ValueError(f"P1 must lie in [0, 1], got {self.P1}")
        object.__setattr__(self, "B", int(self.B))
        object.__setattr__(self, "M", int(self.M))
        if self.t_s is None:
            object.__setattr__(self, "t_s", self.T_int / self.M)
        elif not self.t_s > 0:
            raise ValueError(f"t_s must be positive, got {self.t_s}")

    @property
    def offsets(self) -> np.ndarray:
        """In-interval sampling offsets ``g(m) = m * t_s``."""
        return np.arange(1, self.M + 1) * self.t_s


@dataclass(frozen=True)
class DetectorConfig:
    weights: tuple[float, ...]
    gamma: float

    def __post_init__(self):
        w = tuple(float(x) for x in np.asarray(self.weights, dtype=float).ravel())
        if any(x < 0 or not math.isfinite(x) for x in w):
            raise ValueError("weights must be finite and non-negative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def M(self) -> int:
        return len(self.weights)


def sample_times(frame: FrameConfig, j: int) -> np.ndarray:
    """Sampling instants of interval ``j`` (1-based)."""
    if not 1 <= j <= frame.B:
        raise IndexOutOfRange(f"interval index {j} outside 1..{frame.B}")
    return (j - 1) * frame.T_int + frame.offsets


def all_sample_times(frame: FrameConfig) -> np.ndarray:
    """``(B, M)`` array of every sampling instant in the frame."""
    return np.arange(frame.B)[:, None] * frame.T_int + frame.offsets[None, :]


def matched_weights(
    ch: ChannelParams,
    p: VelocityProfile,
    frame: FrameConfig,
    mode: WeightsMode = "template",
) -> np.ndarray:
    """Matched-filter weights, one per in-interval sample.

    ``"template"`` (default) uses the mean count of a lone emission at the
    interval start plus the noise mean. ``"pilot"`` uses the mean count in
    the last interval of an all-ones frame, i.e. the template with the
    full steady-state interference added.
    """
    if mode == "template":
        return np.asarray(expected_count_uniform(ch, p, frame.offsets, 0.0)) + ch.noise_mean
    if mode == "pilot":
        ones = np.ones(frame.B, dtype=np.int8)
        return np.asarray(expected_signal(ch, p, frame.T_int, ones, sample_times(frame, frame.B)))
    raise ValueError(f"unknown weights mode {mode!r}")


def decide(observations, d: DetectorConfig):
    """Weighted-sum decision.

    ``observations`` has trailing dimension ``M``; leading dimensions are
    treated as independent intervals. Returns an int (or int array) of
    decoded bits.
    """
    obs = np.asarray(observations, dtype=float)
    if obs.ndim == 0 or obs.shape[-1] != d.M:
        raise LengthMismatch(f"expected {d.M} observations per interval, got shape {obs.shape}")
    out = (obs @ np.asarray(d.weights) >= d.gamma).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def bit_errors_at(gammas, sums_one: np.ndarray, sums_zero: np.ndarray) -> np.ndarray:
    """Error counts for each threshold, from pre-sorted weighted sums.

    ``sums_one`` / ``sums_zero`` are the sorted weighted sums of intervals
    whose transmitted bit was 1 / 0. A 1 is missed when its sum is below the
    threshold; a 0 is a false alarm when its sum reaches it.
    """
    g = np.asarray(gammas, dtype=float)
    misses = np.searchsorted(sums_one, g, side="left")
    false_alarms = sums_zero.size - np.searchsorted(sums_zero, g, side="left")
    return misses + false_alarms


def threshold_from_sums(sums, bits, *, grid_points: int = GRID_POINTS, golden_iters: int = 60) -> float:
    """Error-minimising threshold for a fixed set of realisations.

    A uniform grid over ``[0, max(sums)]`` locates the best cell; golden-section
    search then refines inside the neighbouring cells. The error count is a
    step function, so the best evaluated point (grid or golden) is returned.

    Raises
    ------
    NonConvergence
        If the error count is identical for every grid threshold.
    """
    sums = np.asarray(sums, dtype=float).ravel()
    bits = np.asarray(bits).ravel().astype(bool)
    s1 = np.sort(sums[bits])
    s0 = np.sort(sums[~bits])
    top = float(sums.max()) if sums.size else 0.0
    # one step past the largest sum so "decide all zeros" is on the grid
    hi = top * (1.0 + 1e-9) + 1e-12
    grid = np.linspace(0.0, hi, grid_points)
    errs = bit_errors_at(grid, s1, s0)
    if errs.min() == errs.max():
        raise NonConvergence("bit-error count is flat over every threshold; channel carries no information")
    k = int(np.argmin(errs))
    best_g, best_e = float(grid[k]), int(errs[k])

    a = float(grid[max(k - 1, 0)])
    b = float(grid[min(k + 1, grid_points - 1)])
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = int(bit_errors_at(c, s1, s0)), int(bit_errors_at(d, s1, s0))
    for _ in range(golden_iters):
        for g, e in ((c, fc), (d, fd)):
            if e < best_e:
                best_g, best_e = g, e
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = int(bit_errors_at(c, s1, s0))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = int(bit_errors_at(d, s1, s0))
    return best_g


def optimize_threshold(
    ch: ChannelParams,
    p: VelocityProfile,
    frame: FrameConfig,
    trials: int,
    seed: int,
    *,
    weights: Sequence[float] | None = None,
    weights_mode: WeightsMode = "template",
    sequence=None,
    isi_window: int | None = None,
    threads: int | None = None,
) -> float:
    """Monte Carlo search for the BER-minimising threshold.

    All candidate thresholds are scored on the same pre-generated
    realisations (common random numbers), drawn from a training stream of
    ``seed`` that is disjoint from the stream :func:`~ephoresim.mcsim.estimate_ber`
    uses for scoring. Deterministic for a given seed.
    """
    from . import mcsim

    if trials < 1000:
        raise ValueError(f"threshold search needs at least 1000 trials, got {trials}")
    if weights is None:
        weights = matched_weights(ch, p, frame, weights_mode)
    sums, bits = mcsim.weighted_sums(
        ch, p, frame, weights, trials, seed,
        stream=mcsim.TRAINING_STREAM, sequence=sequence, isi_window=isi_window, threads=threads,
    )
    return threshold_from_sums(sums, bits)
