import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate

from ephoresim import (
    Constant,
    DesignConstraint,
    Exponential,
    InfeasibleDesign,
    InvalidConstraint,
    InvalidInterval,
    PiecewiseCustom,
    Sinusoidal,
    average_power,
    design_exponential,
    design_sinusoidal,
    displacement,
    first_velocity_minimum,
    position,
    profile_from_dict,
    velocity_at,
)
from ephoresim.field import MAX_LAMBDA_T, _exp_power

T = 1e-4
X0 = 5e-7
PROFILES = [
    Constant(0.01),
    Sinusoidal(8e-3, 8e-3, 1e4, 5.07),
    Exponential(1e-10, -5e-7, 8e4, 5e-7),
    PiecewiseCustom(((0.0, 0.0), (3e-5, 0.02), (7e-5, -0.01), (1e-4, 0.004))),
]


@pytest.mark.parametrize("p", PROFILES, ids=lambda p: p.variant)
def test_position_and_power_match_quadrature(p):
    for t in (1.3e-5, 5e-5, 1e-4):
        x, _ = integrate.quad(lambda s: velocity_at(p, s), 0, t, epsabs=0, epsrel=1e-12, limit=200)
        e, _ = integrate.quad(lambda s: velocity_at(p, s) ** 2, 0, t, epsabs=0, epsrel=1e-12, limit=200)
        assert position(p, t) == pytest.approx(x, rel=1e-9, abs=1e-20)
        assert average_power(p, t) == pytest.approx(e / t, rel=1e-9)


@pytest.mark.parametrize("p", PROFILES, ids=lambda p: p.variant)
def test_dict_round_trip(p):
    q = profile_from_dict(p.to_dict())
    t = np.linspace(0, 2e-4, 7)
    np.testing.assert_array_equal(velocity_at(q, t), velocity_at(p, t))


def test_position_starts_at_zero_and_vectorises():
    for p in PROFILES:
        assert position(p, 0.0) == 0.0
        t = np.linspace(0, T, 5)
        np.testing.assert_allclose(position(p, t), [position(p, float(s)) for s in t], rtol=1e-14, atol=0)


def test_constant_examples():
    p = Constant(0.01)
    assert position(p, 5e-5) == pytest.approx(5e-7)
    assert average_power(p, T) == pytest.approx(1e-4)


def test_periodic_extension():
    p = Sinusoidal(8e-3, 8e-3, 1e4, 5.07, period=T)
    q = Sinusoidal(8e-3, 8e-3, 1e4, 5.07)
    t = np.array([0.3e-4, 1.3e-4, 2.7e-4])
    np.testing.assert_allclose(velocity_at(p, t), velocity_at(q, t), rtol=1e-10)
    e = Exponential(1e-10, -5e-7, 8e4, 5e-7, period=T)
    assert velocity_at(e, 1.25e-4) == pytest.approx(velocity_at(e, 0.25e-4), rel=1e-12)
    assert position(e, 2.5e-4) == pytest.approx(2 * position(e, T) + position(e, 0.5e-4), rel=1e-12)


def test_displacement():
    p = Constant(0.01)
    assert displacement(p, 1e-5, 3e-5) == pytest.approx(2e-7)
    with pytest.raises(InvalidInterval):
        displacement(p, 3e-5, 1e-5)


def test_piecewise_prepends_origin_knot():
    p = PiecewiseCustom(((1e-5, 0.02), (2e-5, 0.0)))
    assert velocity_at(p, 0.0) == 0.02
    assert position(p, 1e-5) == pytest.approx(2e-7)
    with pytest.raises(ValueError):
        PiecewiseCustom(((2e-5, 0.0), (1e-5, 0.0)))


def test_sinusoidal_reference_design():
    p = design_sinusoidal(DesignConstraint(1e-4, T, X0))
    assert p.A_v == pytest.approx(8.164965809e-3, rel=1e-9)
    assert p.DC_v == p.A_v and p.f_v == pytest.approx(1e4)
    assert p.phi_v == pytest.approx(5.0692, abs=1e-3)
    t1 = first_velocity_minimum(p)
    assert t1 == pytest.approx(5.5678e-5, rel=1e-3)
    assert position(p, t1) == pytest.approx(X0, rel=1e-10)
    assert velocity_at(p, t1) == pytest.approx(0.0, abs=1e-12)
    assert average_power(p, T) == pytest.approx(1e-4, rel=1e-12)


def test_sinusoidal_infeasible():
    # reach A_v * T_int < x0
    with pytest.raises(InfeasibleDesign):
        design_sinusoidal(DesignConstraint(2.5e-5, T, X0))


def test_exponential_reference_design():
    p = design_exponential(DesignConstraint(1e-4, T, X0, X0))
    assert p.lam == pytest.approx(8e4, rel=1e-3)
    assert p.C2 == pytest.approx(-5e-7, rel=1e-3)
    assert abs(p.C1) < 1e-11
    assert p.path(0.0) == pytest.approx(0.0, abs=1e-18)
    assert p.path(T) == pytest.approx(X0, rel=1e-9)
    assert average_power(p, T) == pytest.approx(1e-4, rel=1e-10)


def test_exponential_boundaries():
    with pytest.raises(InvalidConstraint):
        design_exponential(DesignConstraint(1e-4, T, X0))
    # budget exactly the straight-line transfer power: no interior lam
    with pytest.raises(InfeasibleDesign):
        design_exponential(DesignConstraint(2.5e-5, T, X0, X0))
    with pytest.raises(InfeasibleDesign):
        design_exponential(DesignConstraint(1.0, T, X0, X0))


@pytest.mark.parametrize("kw", [dict(xi_v=0.0), dict(T_int=-1.0), dict(x0=math.inf), dict(x1=-1e-7)])
def test_constraint_validation(kw):
    base = dict(xi_v=1e-4, T_int=T, x0=X0, x1=X0)
    base.update(kw)
    with pytest.raises(InvalidConstraint):
        DesignConstraint(**base)


@settings(max_examples=60, deadline=None)
@given(
    log_xi=st.floats(-6, -2),
    x0=st.floats(1e-7, 2e-6),
    log_T=st.floats(-5, -3),
)
def test_sinusoidal_design_hits_target(log_xi, x0, log_T):
    c = DesignConstraint(10**log_xi, 10**log_T, x0)
    assume(math.sqrt(2 * c.xi_v / 3) * c.T_int >= x0 * (1 + 1e-9))
    p = design_sinusoidal(c)
    assert abs(average_power(p, c.T_int) - c.xi_v) / c.xi_v < 1e-10
    t1 = first_velocity_minimum(p)
    assert 0 < t1 <= c.T_int
    assert position(p, t1) == pytest.approx(x0, rel=1e-9)
    assert np.all(np.asarray(velocity_at(p, np.linspace(0, c.T_int, 101))) >= -1e-12)


@settings(max_examples=60, deadline=None)
@given(log_xi=st.floats(-6, -2), x0=st.floats(1e-7, 2e-6), ratio=st.floats(0.0, 2.0))
def test_exponential_design_hits_target(log_xi, x0, ratio):
    c = DesignConstraint(10**log_xi, T, x0, ratio * x0)
    try:
        p = design_exponential(c)
    except InfeasibleDesign:
        # only allowed at the two ends of the admissible budget range
        ceiling = _exp_power(MAX_LAMBDA_T / T, T, c.x0, c.x1)
        assert c.xi_v <= (c.x1 / T) ** 2 * (1 + 1e-6) or c.xi_v > ceiling
        return
    assert abs(average_power(p, T) - c.xi_v) / c.xi_v < 1e-8
    assert p.path(T) == pytest.approx(c.x1, rel=1e-8, abs=1e-18)


def test_sinusoid_stronger_budget_quadrature_oracle():
    p = design_sinusoidal(DesignConstraint(4e-4, T, X0))
    t1 = first_velocity_minimum(p)
    x, _ = integrate.quad(lambda s: velocity_at(p, s), 0, t1, epsabs=1e-16, epsrel=1e-13)
    assert abs(x - X0) < 1e-12
    assert 0.0 <= p.phi_v < 2 * math.pi


def test_sinusoid_never_reverses():
    p = design_sinusoidal(DesignConstraint(1e-4, T, X0))
    v = np.asarray(velocity_at(p, np.linspace(0, T, 10_001)))
    assert v.min() >= -1e-15


def test_exponential_power_matches_quadrature():
    p = design_exponential(DesignConstraint(1e-4, T, X0, X0))
    e, _ = integrate.quad(lambda s: velocity_at(p, s) ** 2, 0, T, epsabs=0, epsrel=1e-13, limit=400)
    assert abs(e / T - 1e-4) < 1e-13


def test_exponential_matches_sinusoid_travel():
    sin = design_sinusoidal(DesignConstraint(1e-4, T, X0))
    travel = displacement(sin, 0, T)
    assert travel == pytest.approx(sin.DC_v * T, rel=1e-12)
    p = design_exponential(DesignConstraint(1e-4, T, X0, travel))
    assert displacement(p, 0, T) == pytest.approx(travel, rel=1e-9)


def test_exponential_boundary_conditions_strict():
    for x1 in (0.0, X0, 8.17e-7):
        p = design_exponential(DesignConstraint(1e-4, T, X0, x1))
        tol = 1e-12 * max(X0, x1)
        assert abs(p.path(0.0)) <= tol
        assert abs(p.path(T) - x1) <= tol


def test_reference_velocities():
    assert velocity_at(Constant(0.01), 3.7e-3) == 0.01
    e = Exponential(0.0, -5e-7, 8e4)
    assert velocity_at(e, 0.0) == pytest.approx(0.04)
    assert displacement(e, 0, 1e-3) == pytest.approx(5e-7, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    idx=st.integers(0, len(PROFILES) - 1),
    a=st.floats(0, 3e-4),
    b=st.floats(0, 3e-4),
    c=st.floats(0, 3e-4),
)
def test_displacement_additive(idx, a, b, c):
    a, b, c = sorted((a, b, c))
    p = PROFILES[idx]
    whole = displacement(p, a, c)
    parts = displacement(p, a, b) + displacement(p, b, c)
    scale = max(abs(whole), abs(displacement(p, a, b)), abs(displacement(p, b, c)), 1e-30)
    assert abs(whole - parts) <= 1e-12 * scale
    assert displacement(p, b, b) == 0.0
