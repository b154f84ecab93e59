"""Expected concentration and expected receiver counts for the advection-diffusion channel.

Geometry: the passive spherical receiver of radius ``r_obs`` is centred at
the origin; the point transmitter sits at ``(-x0, 0, 0)``. An impulsive
emission of ``N_EM`` molecules at ``t0`` spreads as an isotropic Gaussian
whose centre is carried along ``x`` by the velocity profile::

    C(r, t; t0) = N_EM / (4 pi D (t - t0))**1.5 * exp(-|r_eff|**2 / (4 D (t - t0)))

with ``r_eff`` measured from the advected group centre. Profiles only move
molecules along ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import QuadratureFailure, SingularTime
from .field import VelocityProfile, displacement

__all__ = [
    "ChannelParams",
    "BitSequence",
    "expected_concentration",
    "effective_distance",
    "expected_count_uniform",
    "expected_count_integrated",
    "ball_integral",
    "expected_signal",
]


@dataclass(frozen=True)
class ChannelParams:
    """Channel geometry and physics. Defaults are the reference system parameters."""

    x0: float = 5e-7
    r_obs: float = 5e-8
    D_A: float = 1e-9
    N_EM: float = 1e4
    noise_mean: float = 1.0

    def __post_init__(self):
        for name in ("x0", "r_obs", "D_A"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        # N_EM = 0 is allowed for no-signal sanity runs
        if not self.N_EM >= 0:
            raise ValueError(f"N_EM must be non-negative, got {self.N_EM}")
        if not self.noise_mean >= 0:
            raise ValueError(f"noise_mean must be non-negative, got {self.noise_mean}")

    @property
    def V_obs(self) -> float:
        return 4.0 / 3.0 * math.pi * self.r_obs**3


@dataclass(frozen=True)
class BitSequence:
    """Transmitted binary sequence ``W[1..B]``."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in np.asarray(self.bits).ravel())
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, s: str) -> "BitSequence":
        return cls(tuple(int(ch) for ch in s if ch in "01"))

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def B(self) -> int:
        return len(self.bits)

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.int8)


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _gaussian(ch: ChannelParams, dist_sq, tau):
    four_dt = 4.0 * ch.D_A * tau
    return ch.N_EM / (math.pi * four_dt) ** 1.5 * np.exp(-dist_sq / four_dt)


def expected_concentration(ch: ChannelParams, p: VelocityProfile, pos: Sequence[float], t: float, t0: float) -> float:
    """Expected concentration (molecules/m^3) at ``pos`` for an emission at ``t0``.

    At ``t == t0`` the concentration is a point impulse at the transmitter:
    zero everywhere else, :class:`SingularTime` at the transmitter itself.
    """
    x, y, z = (float(c) for c in pos)
    if t < t0:
        raise ValueError("expected_concentration needs t >= t0")
    dx = displacement(p, t0, t)
    dist_sq = (x + ch.x0 - dx) ** 2 + y * y + z * z
    if t == t0:
        if dist_sq == 0.0:
            raise SingularTime("concentration is a delta at the transmitter when t == t0")
        return 0.0
    return float(_gaussian(ch, dist_sq, t - t0))


def effective_distance(ch: ChannelParams, p: VelocityProfile, t, t0):
    """Distance from the receiver centre to the advected group centre."""
    return _out(np.abs(ch.x0 - displacement(p, t0, t)))


def expected_count_uniform(ch: ChannelParams, p: VelocityProfile, t, t0=0.0):
    """Mean number of molecules inside the receiver, uniform-concentration approximation.

    Vectorised over ``t`` and ``t0``. Returns exactly 0 wherever ``t <= t0``.
    """
    t = np.asarray(t, dtype=float)
    t0 = np.asarray(t0, dtype=float)
    tau = t - t0
    live = tau > 0
    if not np.any(live):
        return _out(np.zeros(np.broadcast(t, t0).shape))
    tt, tt0 = np.broadcast_arrays(t, t0)
    tau_safe = np.where(live, tau, 1.0)
    d = ch.x0 - displacement(p, np.where(live, tt0, 0.0), np.where(live, tt, 0.0))
    n = ch.V_obs * _gaussian(ch, np.square(d), tau_safe)
    return _out(np.where(live, n, 0.0))


def ball_integral(
    ch: ChannelParams,
    tau: float,
    offset: float,
    radius: float,
    *,
    rtol: float = 1e-6,
) -> float:
    """Integrate a point-emission Gaussian over a ball.

    ``offset`` is the distance between the ball centre and the Gaussian
    centre, ``tau`` the time since emission. The azimuth contributes ``2 pi``
    and the polar angle integrates in closed form, leaving an adaptive
    quadrature over the radius. The radial range is clipped to where the
    Gaussian carries mass so narrow clouds inside large balls are not missed.

    Raises
    ------
    QuadratureFailure
        If the error estimate exceeds ``rtol`` relative to the result.
    """
    if not 1e-12 <= rtol < 1:
        raise ValueError(f"rtol must lie in [1e-12, 1), got {rtol}")
    four_dt = 4.0 * ch.D_A * tau
    norm = ch.N_EM / (math.pi * four_dt) ** 1.5
    d = abs(offset)

    def shell(r: float) -> float:
        # r^2 times the integral over mu = cos(theta) in [-1, 1]
        if r * d == 0.0:
            return 2.0 * r * r * math.exp(-(r * r + d * d) / four_dt)
        return r * four_dt / (2.0 * d) * math.exp(-((r - d) ** 2) / four_dt) * -math.expm1(-4.0 * r * d / four_dt)

    # beyond 12 diffusion lengths from the cloud centre the integrand is < e^-144
    reach = 12.0 * math.sqrt(four_dt)
    lo, hi = max(0.0, d - reach), min(radius, d + reach)
    if lo >= hi:
        return 0.0
    pts = [d] if lo < d < hi else None
    val, err = integrate.quad(shell, lo, hi, epsabs=0.0, epsrel=rtol * 1e-1, limit=200, points=pts)
    rel = err / abs(val) if val else (0.0 if err == 0 else math.inf)
    if rel > rtol:
        raise QuadratureFailure(f"ball quadrature reached rel. error {rel:.2e} > {rtol:.1e}")
    return 2.0 * math.pi * norm * val


def expected_count_integrated(ch: ChannelParams, p: VelocityProfile, t: float, t0: float = 0.0, *, rtol: float = 1e-6) -> float:
    """Mean receiver count from integrating the concentration over the receiver volume.

    Accuracy oracle for :func:`expected_count_uniform`; 0 for ``t <= t0``.
    """
    if t <= t0:
        return 0.0
    d = effective_distance(ch, p, t, t0)
    return ball_integral(ch, t - t0, d, ch.r_obs, rtol=rtol)


def expected_signal(
    ch: ChannelParams,
    p: VelocityProfile,
    T_int: float,
    bits: BitSequence | Sequence[int],
    t,
    *,
    isi_window: int | None = None,
):
    """Mean observed count at time(s) ``t`` for a bit sequence plus noise.

    Bit ``j`` (1-based) releases molecules at ``(j - 1) * T_int`` when it is 1.
    Only emissions at or before ``t`` contribute. ``isi_window`` limits the
    sum to emissions from the ``isi_window`` most recent intervals
    (None keeps the full history).
    """
    w = bits.as_array() if isinstance(bits, BitSequence) else np.asarray(bits, dtype=np.int8)
    t = np.asarray(t, dtype=float)
    total = np.full(t.shape, float(ch.noise_mean))
    current = np.floor(t / T_int).astype(int)  # 0-based slot containing t
    for j in np.flatnonzero(w):
        t0 = j * T_int
        mask = t >= t0
        if isi_window is not None:
            mask &= current - j < isi_window
        if np.any(mask):
            total = total + np.where(mask, expected_count_uniform(ch, p, t, t0), 0.0)
    return _out(total)
