"""Designing the electric field for a fixed power budget.

Three ways to spend the same mean squared velocity (1e-4 m^2/s^2) moving a
molecule group 0.5 um towards the receiver within one 0.1 ms bit interval.
"""

import numpy as np

from ephoresim import (
    Constant,
    DesignConstraint,
    average_power,
    design_exponential,
    design_sinusoidal,
    first_velocity_minimum,
    position,
    velocity_at,
)

T_int = 1e-4
x0 = 5e-7
c = DesignConstraint(xi_v=1e-4, T_int=T_int, x0=x0, x1=x0)

sin = design_sinusoidal(c)
t1 = first_velocity_minimum(sin)
print(f"sinusoid:    A_v = DC_v = {sin.A_v:.4e} m/s, phi_v = {sin.phi_v:.4f} rad")
print(f"             first velocity minimum t1 = {t1:.4e} s, travelled {position(sin, t1):.3e} m")

opt = design_exponential(c)
print(f"exponential: lam = {opt.lam:.1f} 1/s, C1 = {opt.C1:.2e} m, C2 = {opt.C2:.4e} m")
print(f"             group reaches {opt.path(T_int):.3e} m at the end of the interval")

const = Constant(np.sqrt(c.xi_v))
for name, p in [("constant", const), ("sinusoid", sin), ("exponential", opt)]:
    print(f"{name:>12}: average power {average_power(p, T_int):.6e}")

# The exponential field front-loads the push: most of the travel happens in
# the first few microseconds, then the group idles near the receiver.
# At t = T_int the periodic field has already restarted its next cycle.
t = np.linspace(0, T_int, 6)
print("\n   t [us]   x_const [um]   x_sin [um]   x_exp [um]   v_exp [m/s]")
for ti in t:
    print(f"{1e6 * ti:8.1f} {1e6 * position(const, ti):13.3f} {1e6 * position(sin, ti):12.3f}"
          f" {1e6 * position(opt, ti):12.3f} {velocity_at(opt, ti):13.4e}")

# Halving the budget breaks the sinusoidal design: its first minimum can no
# longer be pushed as far as the receiver.
try:
    design_sinusoidal(DesignConstraint(0.25e-4, T_int, x0))
except Exception as exc:
    print(f"\nxi_v = 2.5e-5: {type(exc).__name__}: {exc}")
