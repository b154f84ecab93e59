"""Does the molecule actually follow the commanded velocity?

A sphere in a viscous fluid lags the forcing by its relaxation time
Gamma/f. Small molecules track the field almost instantly; micron-sized
particles need a noticeable fraction of the bit interval.
"""

import numpy as np

from ephoresim import (
    BBOParams,
    DesignConstraint,
    bbo_analytic,
    bbo_numeric,
    design_sinusoidal,
    stokes_einstein_radius,
    time_to_feasibility,
    velocity_at,
)

T_int = 1e-4
sin = design_sinusoidal(DesignConstraint(1e-4, T_int, 5e-7))
t = np.linspace(0, T_int, 1001)
v = np.asarray(velocity_at(sin, t))

# lag is the worst |u - v| over the second half of the interval, relative to the peak velocity
print("  r_m [m]   tau [s]        lag   numeric vs analytic   feasible after")
for r in (1e-7, 1e-6, 5e-6, 1e-5):
    bp = BBOParams(r)
    u = np.asarray(bbo_analytic(bp, sin, t))
    _, un = bbo_numeric(bp, sin, T_int, 1e-10, t_eval=t)
    dev = np.max(np.abs(u - v)[t >= T_int / 2]) / np.max(v)
    agree = np.max(np.abs(un - u)) / np.max(v)
    frac = time_to_feasibility(bp, sin, T_int) / T_int
    print(f"{r:9.0e} {bp.relaxation_time:9.2e} {dev:10.2e} {agree:21.1e} {100 * frac:13.3f}% of T_int")

r_info = stokes_einstein_radius(1e-9)
print(f"\nStokes-Einstein radius for D = 1e-9 m^2/s at 293 K: {r_info:.3e} m")
print(f"relaxation time at that radius: {BBOParams(r_info).relaxation_time:.2e} s")
