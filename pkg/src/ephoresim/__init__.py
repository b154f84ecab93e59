"""Electrophoretic molecular communication: field design, channel model,
Monte Carlo detection and molecule response to time-varying fields."""

__version__ = "0.1.0"

from .channel import (
    BitSequence,
    ChannelParams,
    ball_integral,
    effective_distance,
    expected_concentration,
    expected_count_integrated,
    expected_count_uniform,
    expected_signal,
)
from .detection import (
    DetectorConfig,
    FrameConfig,
    all_sample_times,
    decide,
    matched_weights,
    optimize_threshold,
    sample_times,
)
from .errors import *  # noqa: F401,F403
from .field import (
    Constant,
    DesignConstraint,
    Exponential,
    PiecewiseCustom,
    Sinusoidal,
    VelocityProfile,
    average_power,
    design_exponential,
    design_sinusoidal,
    displacement,
    first_velocity_minimum,
    position,
    profile_from_dict,
    velocity_at,
)
from .fluiddyn import (
    BBOParams,
    bbo_analytic,
    bbo_exponential,
    bbo_numeric,
    bbo_sinusoidal,
    feasibility_ratio,
    radius_feasibility_bound,
    stokes_einstein_radius,
    time_to_feasibility,
)
from .mcsim import BerReport, SimulationConfig, estimate_ber, generate_sequence, simulate_observations
