"""Expected receiver count for the bit pattern 0110010 under each field."""

import math

import numpy as np

from ephoresim import (
    BitSequence,
    ChannelParams,
    Constant,
    DesignConstraint,
    Sinusoidal,
    design_exponential,
    design_sinusoidal,
    expected_count_integrated,
    expected_count_uniform,
    expected_signal,
)

ch = ChannelParams()  # x0 = 0.5 um, r_obs = 50 nm, D = 1e-9 m^2/s, 1e4 molecules
T_int = 1e-4
c = DesignConstraint(1e-4, T_int, ch.x0, ch.x0)
sin = design_sinusoidal(c)
fields = {
    "optimized": design_exponential(c),
    "sin(5.07)": sin,
    "sin(pi)": Sinusoidal(sin.A_v, sin.DC_v, sin.f_v, math.pi, sin.period),
    "constant": Constant(0.01),
}

bits = BitSequence.from_string("0110010")
t = np.linspace(0, len(bits) * T_int, 701)
print("peak mean count over 7 intervals, and the mean just before each bit boundary")
for name, p in fields.items():
    s = expected_signal(ch, p, T_int, bits, t)
    ends = s[100::100]
    print(f"{name:>10}: peak {s.max():6.2f}   ends " + " ".join(f"{x:5.2f}" for x in ends))

# The uniform-concentration count replaces the integral over the receiver
# ball by the centre value times the volume. It is accurate once the cloud
# is wide compared with the receiver.
p = fields["constant"]
print("\n  tau [us]   uniform   integrated   rel. diff")
for tau in (2e-5, 4e-5, 6e-5, 8e-5, 1e-4):
    a = expected_count_uniform(ch, p, tau)
    b = expected_count_integrated(ch, p, tau)
    print(f"{1e6 * tau:10.0f} {a:9.4f} {b:12.4f} {100 * (a - b) / b:10.3f}%")
