"""Molecule-velocity profiles induced by a uniform time-varying electric field.

Four profile families are supported. Each knows its closed-form velocity, its
position (antiderivative of velocity, zero at ``t = 0``) and its accumulated
squared velocity, all over one base period. The module-level functions
:func:`velocity_at`, :func:`displacement` and :func:`average_power` add the
periodic extension: a profile with ``period`` set repeats every ``period``
seconds, restarting its waveform at each multiple. That is how a per-bit field
is applied to every bit interval of a frame.

Two designers produce profiles that meet an average-power budget
``mean(v**2) <= xi_v``:

* :func:`design_sinusoidal` picks ``A_v = DC_v`` and a phase that parks the
  molecule group on the receiver at the first velocity minimum;
* :func:`design_exponential` solves the Euler-Lagrange problem that minimises
  the RMS distance between group centre and receiver, giving
  ``x(t) = C1 exp(lam t) + C2 exp(-lam t) + x0``.

All times are seconds, distances metres, velocities m/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np

from ._roots import find_root
from .errors import InfeasibleDesign, InvalidConstraint, InvalidInterval

__all__ = [
    "VelocityProfile",
    "Constant",
    "Sinusoidal",
    "Exponential",
    "PiecewiseCustom",
    "DesignConstraint",
    "design_sinusoidal",
    "design_exponential",
    "first_velocity_minimum",
    "velocity_at",
    "position",
    "displacement",
    "average_power",
    "profile_from_dict",
]

#: ``lam * T_int`` above this is outside the supported exponential design range.
MAX_LAMBDA_T = 50.0


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


class VelocityProfile:
    """Base class for the profile families.

    Subclasses are frozen dataclasses implementing ``_velocity``,
    ``_position`` and ``_energy`` on the base period (or on ``t >= 0`` when
    ``period`` is None). Use the module-level functions rather than the
    underscored methods; they handle the periodic extension.
    """

    variant: ClassVar[str]
    period: float | None

    def _velocity(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _position(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _energy(self, t: np.ndarray) -> np.ndarray:
        """Integral of velocity squared from 0 to ``t``."""
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def _check_period(self) -> None:
        if self.period is not None and not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")


@dataclass(frozen=True)
class Constant(VelocityProfile):
    v_const: float
    period: float | None = None

    variant: ClassVar[str] = "constant"

    def __post_init__(self):
        self._check_period()

    def _velocity(self, t):
        return np.full_like(t, self.v_const)

    def _position(self, t):
        return self.v_const * t

    def _energy(self, t):
        return self.v_const**2 * t

    def to_dict(self):
        return {"variant": self.variant, "v_const": self.v_const, "period": self.period}


@dataclass(frozen=True)
class Sinusoidal(VelocityProfile):
    """``v(t) = A_v sin(2 pi f_v t - phi_v) + DC_v``."""

    A_v: float
    DC_v: float
    f_v: float
    phi_v: float
    period: float | None = None

    variant: ClassVar[str] = "sinusoidal"

    def __post_init__(self):
        if not self.f_v > 0:
            raise ValueError(f"f_v must be positive, got {self.f_v}")
        self._check_period()

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.f_v

    def _velocity(self, t):
        return self.A_v * np.sin(self.omega * t - self.phi_v) + self.DC_v

    def _position(self, t):
        w = self.omega
        return self.DC_v * t + (self.A_v / w) * (
            math.cos(self.phi_v) - np.cos(w * t - self.phi_v)
        )

    def _energy(self, t):
        w, a, dc, phi = self.omega, self.A_v, self.DC_v, self.phi_v
        theta = w * t - phi
        sq = 0.5 * a * a * (t - (np.sin(2 * theta) + math.sin(2 * phi)) / (2 * w))
        cross = 2 * a * dc * (math.cos(phi) - np.cos(theta)) / w
        return sq + cross + dc * dc * t

    def to_dict(self):
        return {
            "variant": self.variant,
            "A_v": self.A_v,
            "DC_v": self.DC_v,
            "f_v": self.f_v,
            "phi_v": self.phi_v,
            "period": self.period,
        }


@dataclass(frozen=True)
class Exponential(VelocityProfile):
    """Group-centre path ``x(t) = C1 e^{lam t} + C2 e^{-lam t} + x0_offset``.

    The velocity is ``C1 lam e^{lam t} - C2 lam e^{-lam t}``. Positions
    reported by :func:`position` are relative to ``x(0)``, so ``x0_offset``
    only matters through the ``x(0) = C1 + C2 + x0_offset`` identity.
    """

    C1: float
    C2: float
    lam: float
    x0_offset: float = 0.0
    period: float | None = None

    variant: ClassVar[str] = "exponential"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        self._check_period()

    def path(self, t):
        """Absolute group-centre coordinate ``x(t)`` (not shifted to zero at t=0)."""
        t = np.asarray(t, dtype=float)
        return _scalar_or_array(
            self.C1 * np.exp(self.lam * t) + self.C2 * np.exp(-self.lam * t) + self.x0_offset
        )

    def _velocity(self, t):
        lam = self.lam
        return lam * (self.C1 * np.exp(lam * t) - self.C2 * np.exp(-lam * t))

    def _position(self, t):
        lam = self.lam
        return self.C1 * np.expm1(lam * t) + self.C2 * np.expm1(-lam * t)

    def _energy(self, t):
        lam, c1, c2 = self.lam, self.C1, self.C2
        return (
            0.5 * lam * c1 * c1 * np.expm1(2 * lam * t)
            - 0.5 * lam * c2 * c2 * np.expm1(-2 * lam * t)
            - 2.0 * c1 * c2 * lam * lam * t
        )

    def to_dict(self):
        return {
            "variant": self.variant,
            "C1": self.C1,
            "C2": self.C2,
            "lam": self.lam,
            "x0_offset": self.x0_offset,
            "period": self.period,
        }


@dataclass(frozen=True)
class PiecewiseCustom(VelocityProfile):
    """User-supplied velocity knots joined by straight lines.

    Outside the knot range the end velocities are held constant. Position and
    energy are integrated exactly (trapezoid and Simpson are exact for a
    piecewise-linear velocity).
    """

    knots: tuple[tuple[float, float], ...]
    period: float | None = None

    variant: ClassVar[str] = "piecewise"
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _v: np.ndarray = field(init=False, repr=False, compare=False)
    _cum_x: np.ndarray = field(init=False, repr=False, compare=False)
    _cum_e: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._check_period()
        knots = tuple((float(a), float(b)) for a, b in self.knots)
        if not knots:
            raise ValueError("at least one knot is required")
        t = np.array([k[0] for k in knots])
        v = np.array([k[1] for k in knots])
        if np.any(np.diff(t) <= 0):
            raise ValueError("knot times must be strictly increasing")
        if t[0] < 0:
            raise ValueError("knot times must be non-negative")
        if t[0] > 0:
            t = np.concatenate([[0.0], t])
            v = np.concatenate([[v[0]], v])
        dt = np.diff(t)
        seg_x = 0.5 * dt * (v[:-1] + v[1:])
        seg_e = dt * (v[:-1] ** 2 + v[:-1] * v[1:] + v[1:] ** 2) / 3.0
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_v", v)
        object.__setattr__(self, "_cum_x", np.concatenate([[0.0], np.cumsum(seg_x)]))
        object.__setattr__(self, "_cum_e", np.concatenate([[0.0], np.cumsum(seg_e)]))

    def _velocity(self, t):
        return np.interp(t, self._t, self._v)

    def _segment(self, t):
        i = np.clip(np.searchsorted(self._t, t, side="right") - 1, 0, len(self._t) - 1)
        return i, t - self._t[i], self._v[i], np.interp(t, self._t, self._v)

    def _position(self, t):
        i, h, va, vb = self._segment(t)
        return self._cum_x[i] + 0.5 * h * (va + vb)

    def _energy(self, t):
        i, h, va, vb = self._segment(t)
        return self._cum_e[i] + h * (va * va + va * vb + vb * vb) / 3.0

    def to_dict(self):
        return {
            "variant": self.variant,
            "knots": [list(k) for k in self.knots],
            "period": self.period,
        }


_VARIANTS = {cls.variant: cls for cls in (Constant, Sinusoidal, Exponential, PiecewiseCustom)}


def profile_from_dict(data: dict[str, Any]) -> VelocityProfile:
    """Inverse of ``profile.to_dict()``."""
    data = dict(data)
    try:
        cls = _VARIANTS[data.pop("variant")]
    except KeyError as exc:
        raise ValueError(f"unknown or missing profile variant: {exc}") from None
    if cls is PiecewiseCustom:
        data["knots"] = tuple(tuple(k) for k in data["knots"])
    return cls(**data)


# ---------------------------------------------------------------------------
# periodic evaluation


def _periodic(p: VelocityProfile, t: np.ndarray, base) -> np.ndarray:
    """Accumulate a base-period integral ``base`` over the periodic extension."""
    if p.period is None:
        return base(t)
    n = np.floor(t / p.period)
    r = t - n * p.period
    return n * base(np.asarray(p.period, dtype=float)) + base(r)


def velocity_at(p: VelocityProfile, t):
    """Velocity of the molecule group at time ``t`` (scalar or array, ``t >= 0``)."""
    t = np.asarray(t, dtype=float)
    if p.period is not None:
        t = np.mod(t, p.period)
    return _scalar_or_array(p._velocity(t))


def position(p: VelocityProfile, t):
    """Distance travelled by a group released at ``t = 0``."""
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(_periodic(p, t, p._position))


def displacement(p: VelocityProfile, t0, t):
    """Distance travelled between ``t0`` and ``t``.

    Broadcasts over array arguments. Raises :class:`InvalidInterval` if any
    ``t < t0``.
    """
    t0 = np.asarray(t0, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < t0):
        raise InvalidInterval("displacement needs t >= t0")
    return _scalar_or_array(_periodic(p, t, p._position) - _periodic(p, t0, p._position))


def average_power(p: VelocityProfile, T: float) -> float:
    """Time average of ``v**2`` over ``[0, T]`` (m^2/s^2)."""
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    return float(_periodic(p, np.asarray(T, dtype=float), p._energy)) / T


# ---------------------------------------------------------------------------
# design problems


@dataclass(frozen=True)
class DesignConstraint:
    """Inputs shared by the field designers.

    ``x1`` is the final group position required at the end of the interval;
    only :func:`design_exponential` uses it.
    """

    xi_v: float
    T_int: float
    x0: float
    x1: float | None = None

    def __post_init__(self):
        for name in ("xi_v", "T_int", "x0"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise InvalidConstraint(f"{name} must be positive and finite, got {value!r}")
        if self.x1 is not None and not (self.x1 >= 0 and math.isfinite(self.x1)):
            raise InvalidConstraint(f"x1 must be non-negative, got {self.x1!r}")


def first_velocity_minimum(p: Sinusoidal) -> float:
    """Earliest ``t`` in ``(0, 1/f_v]`` where the sinusoid has a minimum."""
    s = (p.phi_v - 0.5 * math.pi) % (2.0 * math.pi)
    if s == 0.0:
        s = 2.0 * math.pi
    return s / p.omega


def design_sinusoidal(c: DesignConstraint) -> Sinusoidal:
    """Sinusoidal field that parks the group on the receiver at the first minimum.

    ``A_v = DC_v = sqrt(2 xi_v / 3)`` saturates the power budget while keeping
    the velocity non-negative; ``f_v = 1/T_int``. The phase is chosen so the
    group has travelled exactly ``x0`` at the first velocity minimum.

    With ``psi = phi_v`` unwrapped to ``(pi/2, 5 pi/2]`` the travel up to that
    minimum is ``(A_v/omega) * (psi - pi/2 + cos psi)``, which increases
    monotonically from 0 to ``A_v T_int``; a solution exists iff
    ``x0 <= A_v T_int``.

    Raises
    ------
    InfeasibleDesign
        If the power budget cannot carry the group ``x0`` within one interval.
    """
    amp = math.sqrt(2.0 * c.xi_v / 3.0)
    f_v = 1.0 / c.T_int
    omega = 2.0 * math.pi * f_v
    reach = amp * c.T_int
    if reach < c.x0:
        raise InfeasibleDesign(
            f"x0={c.x0:g} m is beyond the maximum travel {reach:g} m reachable "
            f"by the first velocity minimum with xi_v={c.xi_v:g}"
        )

    def residual(psi: float) -> float:
        return (amp / omega) * ((psi - 0.5 * math.pi) + math.cos(psi)) - c.x0

    psi = find_root(residual, 0.5 * math.pi, 2.5 * math.pi, scale=c.x0)
    return Sinusoidal(A_v=amp, DC_v=amp, f_v=f_v, phi_v=psi % (2.0 * math.pi), period=c.T_int)


def _exp_coefficients(lam: float, T: float, x0: float, x1: float) -> tuple[float, float]:
    # C1 = (x1 - (1 - E) x0) E / (1 - E^2), E = exp(-lam T); never forms exp(+lam T)
    E = math.exp(-lam * T)
    one_minus_e2 = -math.expm1(-2.0 * lam * T)
    a = (x1 - x0) + x0 * E
    c1 = a * E / one_minus_e2
    return c1, -x0 - c1


def _exp_power(lam: float, T: float, x0: float, x1: float) -> float:
    E = math.exp(-lam * T)
    one_minus_e2 = -math.expm1(-2.0 * lam * T)
    a = (x1 - x0) + x0 * E
    c1 = a * E / one_minus_e2
    c2 = -x0 - c1
    # C1^2 (e^{2 lam T} - 1) rewritten as a^2 / (1 - E^2)
    bracket = a * a / one_minus_e2 + c2 * c2 * one_minus_e2 - 4.0 * c1 * c2 * T * lam
    return lam / (2.0 * T) * bracket


def design_exponential(c: DesignConstraint) -> Exponential:
    """Power-constrained field minimising the RMS group-to-receiver distance.

    The Lagrange multiplier enters only through ``lam``; it is found by
    root-finding the power equation on ``(0, MAX_LAMBDA_T / T_int]``.

    Raises
    ------
    InvalidConstraint
        If ``c.x1`` is missing.
    InfeasibleDesign
        If the budget is below the straight-line transfer power
        ``(x1/T_int)**2`` or would require ``lam T_int > MAX_LAMBDA_T``.
    NonConvergence
        If the root finder runs out of iterations.
    """
    if c.x1 is None:
        raise InvalidConstraint("design_exponential requires the final position x1")
    T, x0, x1, xi = c.T_int, c.x0, c.x1, c.xi_v
    lam_lo = 1e-9 / T
    lam_hi = MAX_LAMBDA_T / T
    p_lo = _exp_power(lam_lo, T, x0, x1)
    p_hi = _exp_power(lam_hi, T, x0, x1)
    if xi <= p_lo:
        raise InfeasibleDesign(
            f"xi_v={xi:g} does not exceed the straight-line power {p_lo:g}; "
            "no positive lam solves the power equation"
        )
    if xi > p_hi:
        raise InfeasibleDesign(
            f"xi_v={xi:g} needs lam*T_int > {MAX_LAMBDA_T:g} (power there is {p_hi:g})"
        )
    lam = find_root(lambda s: _exp_power(s, T, x0, x1) - xi, lam_lo, lam_hi, scale=xi)
    c1, c2 = _exp_coefficients(lam, T, x0, x1)
    return Exponential(C1=c1, C2=c2, lam=lam, x0_offset=x0, period=T)
