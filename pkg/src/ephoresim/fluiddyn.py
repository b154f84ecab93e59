"""Does the molecule actually follow the commanded velocity?

A sphere driven by the electrophoretic force obeys the reduced
Basset-Boussinesq-Oseen balance (drag + added mass, no history force, no
pressure gradient, no gravity)::

    Gamma * du/dt + f * u = f * v(t),      u(0) = 0

with Stokes drag ``f = 6 pi mu_f r_m`` and effective mass
``Gamma = (2/3) pi r_m**3 (2 rho_m + rho_f)``. The applied field is
``E(t) = (f / q_A) v(t)``. The molecule tracks ``v`` once the viscous term
dominates the inertial one, i.e. once ``r_m`` is well below
``sqrt(9 mu_f |u| / ((2 rho_m + rho_f) |du/dt|))``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import GeneralFormUnsupported, StiffnessFailure, UnboundedFeasibility
from .field import Exponential, Sinusoidal, VelocityProfile, velocity_at

__all__ = [
    "BBOParams",
    "bbo_sinusoidal",
    "bbo_exponential",
    "bbo_analytic",
    "bbo_numeric",
    "radius_feasibility_bound",
    "feasibility_ratio",
    "time_to_feasibility",
    "stokes_einstein_radius",
    "stokes_einstein_diffusivity",
    "write_trajectory_csv",
    "BOLTZMANN",
    "ROOM_TEMPERATURE",
]

BOLTZMANN = 1.380649e-23  # J/K
ELEMENTARY_CHARGE = 1.602176634e-19  # C
ROOM_TEMPERATURE = 293.0  # K
RESONANCE_GAP = 1e-9


@dataclass(frozen=True)
class BBOParams:
    """Molecule and fluid constants. Defaults: water-like fluid, unit-charge molecule."""

    r_m: float
    rho_m: float = 1e3
    rho_f: float = 1e3
    mu_f: float = 1e-3
    q_A: float = ELEMENTARY_CHARGE

    def __post_init__(self):
        for name in ("r_m", "rho_m", "rho_f", "mu_f", "q_A"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def drag(self) -> float:
        """Stokes drag coefficient ``f`` (kg/s)."""
        return 6.0 * math.pi * self.mu_f * self.r_m

    @property
    def effective_mass(self) -> float:
        """Particle plus added mass ``Gamma`` (kg)."""
        return 2.0 / 3.0 * math.pi * self.r_m**3 * (2.0 * self.rho_m + self.rho_f)

    @property
    def relaxation_time(self) -> float:
        return self.effective_mass / self.drag

    def applied_field(self, v):
        """Electric field (V/m) that commands velocity ``v``."""
        return self.drag / self.q_A * np.asarray(v, dtype=float)


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def bbo_sinusoidal(bp: BBOParams, p: Sinusoidal, t):
    """Closed-form response to ``v = A sin(omega t - phi) + DC`` from rest."""
    t = np.asarray(t, dtype=float)
    f, G = bp.drag, bp.effective_mass
    w = p.omega
    omega_term = G * p.A_v * f / (f * f + (w * G) ** 2)
    in_phase = f * omega_term / G
    quad = w * omega_term
    theta = w * t - p.phi_v
    steady = in_phase * np.sin(theta) - quad * np.cos(theta) + p.DC_v
    transient = in_phase * math.sin(p.phi_v) + quad * math.cos(p.phi_v) - p.DC_v
    return _out(steady + transient * np.exp(-f * t / G))


def bbo_exponential(bp: BBOParams, p: Exponential, t):
    """Closed-form response to ``v = -C2 lam exp(-lam t)`` (requires ``C1 == 0``).

    Near resonance (``f`` within a relative ``1e-9`` of ``lam * Gamma``) the
    limit ``-(lam f C2 / Gamma) t exp(-lam t)`` replaces the 0/0 form.
    """
    if p.C1 != 0.0:
        raise GeneralFormUnsupported("analytic response covers C1 == 0 only; use bbo_numeric")
    t = np.asarray(t, dtype=float)
    f, G, lam, c2 = bp.drag, bp.effective_mass, p.lam, p.C2
    gap = f - lam * G
    if abs(gap) / f < RESONANCE_GAP:
        return _out(-(lam * f * c2 / G) * t * np.exp(-lam * t))
    return _out(lam * f * c2 / gap * (np.exp(-f * t / G) - np.exp(-lam * t)))


def bbo_analytic(bp: BBOParams, p: VelocityProfile, t):
    """Dispatch to the closed-form response for the profile's family."""
    if isinstance(p, Sinusoidal):
        return bbo_sinusoidal(bp, p, t)
    if isinstance(p, Exponential):
        return bbo_exponential(bp, p, t)
    raise GeneralFormUnsupported(f"no closed-form response for {p.variant} forcing")


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def bbo_numeric(
    bp: BBOParams,
    p: VelocityProfile,
    t_end: float,
    tol: float = 1e-8,
    *,
    t_eval=None,
    max_steps: int = 2_000_000,
):
    """Integrate the force balance with adaptive Dormand-Prince 5(4).

    Error control is mixed: a step is accepted when the local error is below
    ``tol * (|u| + v_scale)``, where ``v_scale`` is the largest commanded
    speed on a coarse grid (so the zero initial state does not force
    vanishing steps). Steps land exactly on every ``t_eval`` point and on
    every period boundary of a periodic profile.

    Returns
    -------
    (t, u) : tuple of ndarray
        Accepted step times (or ``t_eval``) and the velocities there.

    Raises
    ------
    StiffnessFailure
        If the step size underflows or ``max_steps`` is exceeded; this
        happens when the relaxation time is tiny compared with ``t_end``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    f_over_g = bp.drag / bp.effective_mass

    def rhs(t, u):
        return f_over_g * (velocity_at(p, t) - u)

    probe = np.asarray(velocity_at(p, np.linspace(0.0, t_end, 1001)))
    v_scale = float(np.max(np.abs(probe))) or 1.0

    stops = [] if t_eval is None else sorted(float(x) for x in np.atleast_1d(t_eval) if 0 < x <= t_end)
    if p.period is not None:
        k = np.arange(1, int(t_end / p.period) + 1) * p.period
        stops.extend(float(x) for x in k if x < t_end)
    stops.append(t_end)
    stops = sorted(set(stops))

    t, u = 0.0, 0.0
    ts, us = [0.0], [0.0]
    h = min(0.1 * bp.relaxation_time, 1e-3 * t_end)
    k1 = rhs(t, u)
    steps = 0
    for stop in stops:
        while t < stop:
            if steps >= max_steps:
                raise StiffnessFailure(f"more than {max_steps} steps; relaxation time {bp.relaxation_time:g} s")
            if h < 1e-14 * t_end:
                raise StiffnessFailure(f"step size underflow at t={t:g}")
            last = t + h >= stop
            step = stop - t if last else h
            k = [k1]
            for i in range(1, 7):
                ui = u + step * sum(a * kj for a, kj in zip(_A[i], k))
                k.append(rhs(t + _C[i] * step, ui))
            u_new = u + step * float(np.dot(_B5, k))
            err = abs(step * float(np.dot(_E, k)))
            scale = tol * (abs(u_new) + v_scale)
            steps += 1
            fac = 5.0 if err == 0 else 0.9 * (scale / err) ** 0.2
            if err <= scale:
                t = stop if last else t + step
                u = u_new
                k1 = k[6]  # first-same-as-last
                if t_eval is None:
                    ts.append(t)
                    us.append(u)
                if not last:
                    h = step * min(5.0, max(fac, 0.2))
            else:
                h = step * max(0.2, fac)
        if t_eval is not None:
            ts.append(t)
            us.append(u)
        # periodic profiles can jump at a boundary; restart the derivative there
        k1 = rhs(t, u)
    ts_arr, us_arr = np.asarray(ts), np.asarray(us)
    if t_eval is not None:
        wanted = np.atleast_1d(np.asarray(t_eval, dtype=float))
        return wanted, np.interp(wanted, ts_arr, us_arr)
    return ts_arr, us_arr


def radius_feasibility_bound(bp: BBOParams, u: float, dudt: float) -> float:
    """Largest radius for which viscous drag still dominates inertia.

    Raises :class:`UnboundedFeasibility` when ``dudt == 0``.
    """
    if dudt == 0:
        raise UnboundedFeasibility("zero acceleration: any radius satisfies the bound")
    return math.sqrt(9.0 * bp.mu_f * abs(u) / ((2.0 * bp.rho_m + bp.rho_f) * abs(dudt)))


def feasibility_ratio(bp: BBOParams, u, dudt):
    """``bound / r_m``, vectorised; ``inf`` where the acceleration vanishes."""
    u = np.asarray(u, dtype=float)
    dudt = np.asarray(dudt, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = np.sqrt(9.0 * bp.mu_f * np.abs(u) / ((2.0 * bp.rho_m + bp.rho_f) * np.abs(dudt)))
    return _out(np.where(dudt == 0, np.inf, bound / bp.r_m))


def time_to_feasibility(
    bp: BBOParams,
    p: VelocityProfile,
    t_end: float,
    factor: float = 10.0,
    *,
    samples: int = 200_001,
) -> float:
    """First time at which ``bound >= factor * r_m`` along the molecule's response.

    ``u`` comes from the closed form when one exists, otherwise from the
    accepted steps of :func:`bbo_numeric`; ``du/dt`` comes from the force balance itself. The
    crossing is located on a uniform grid then bisected. Returns ``inf`` if
    the criterion is never met before ``t_end``.
    """
    try:
        def response(t):
            return bbo_analytic(bp, p, t)
        response(0.0)
    except GeneralFormUnsupported:
        # adaptive steps plus a Hermite interpolant; du/dt is known from the force balance
        step_t, step_u = bbo_numeric(bp, p, t_end, 1e-10)
        slope = bp.drag / bp.effective_mass * (np.asarray(velocity_at(p, step_t)) - step_u)
        response = CubicHermiteSpline(step_t, step_u, slope)

    f_over_g = bp.drag / bp.effective_mass

    def excess(t):
        u = response(t)
        dudt = f_over_g * (np.asarray(velocity_at(p, t)) - u)
        return np.asarray(feasibility_ratio(bp, u, dudt)) - factor

    t = np.linspace(0.0, t_end, samples)
    ok = excess(t) >= 0
    if not ok.any():
        return math.inf
    i = int(np.argmax(ok))
    if i == 0:
        return 0.0
    lo, hi = float(t[i - 1]), float(t[i])
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if excess(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def stokes_einstein_radius(D: float, temperature: float = ROOM_TEMPERATURE, mu_f: float = 1e-3) -> float:
    """Hydrodynamic radius implied by a diffusion coefficient."""
    if not (D > 0 and temperature > 0 and mu_f > 0):
        raise ValueError("D, temperature and mu_f must be positive")
    return BOLTZMANN * temperature / (6.0 * math.pi * mu_f * D)


def stokes_einstein_diffusivity(r: float, temperature: float = ROOM_TEMPERATURE, mu_f: float = 1e-3) -> float:
    if not (r > 0 and temperature > 0 and mu_f > 0):
        raise ValueError("r, temperature and mu_f must be positive")
    return BOLTZMANN * temperature / (6.0 * math.pi * mu_f * r)


def write_trajectory_csv(path, t, u, v) -> Path:
    """Write ``t, u_x, v_x, deviation`` rows (SI units)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "u_x", "v_x", "deviation"])
        for row in zip(t, u, v):
            writer.writerow([repr(float(x)) for x in row] + [repr(float(row[1] - row[2]))])
    return path
