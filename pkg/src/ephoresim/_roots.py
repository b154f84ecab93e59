"""Bracketed scalar root finding (bisection safeguarding secant steps)."""

from __future__ import annotations

import math
from typing import Callable

from .errors import NonConvergence


def find_root(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    scale: float = 1.0,
    rtol: float = 1e-12,
    maxiter: int = 200,
) -> float:
    """Return ``x`` in ``[lo, hi]`` with ``|func(x)| <= rtol * scale``.

    ``func(lo)`` and ``func(hi)`` must have opposite signs (or one of them
    must already be a root). Each iteration tries a secant step through the
    bracket ends and falls back to bisection whenever the secant point leaves
    the bracket or the bracket fails to shrink by half over two iterations.

    Raises
    ------
    ValueError
        If the endpoints do not bracket a root.
    NonConvergence
        If ``maxiter`` iterations pass without meeting the residual tolerance
        and the bracket has not collapsed to machine precision.
    """
    f_lo = func(lo)
    f_hi = func(hi)
    tol = rtol * abs(scale)
    if abs(f_lo) <= tol:
        return lo
    if abs(f_hi) <= tol:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise ValueError(f"root not bracketed: f({lo})={f_lo}, f({hi})={f_hi}")

    bisect = False
    for _ in range(maxiter):
        width = hi - lo
        x = 0.5 * (lo + hi)
        if not bisect:
            secant = hi - f_hi * (hi - lo) / (f_hi - f_lo)
            if lo < secant < hi:
                x = secant
        fx = func(x)
        if abs(fx) <= tol:
            return x
        if math.copysign(1.0, fx) == math.copysign(1.0, f_lo):
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx
        # a secant step that fails to halve the bracket is followed by bisection
        bisect = (hi - lo) > 0.5 * width
        if hi - lo <= 4.0 * math.ulp(max(abs(lo), abs(hi))):
            return lo if abs(f_lo) < abs(f_hi) else hi
    raise NonConvergence(
        f"root finder exhausted {maxiter} iterations; bracket [{lo}, {hi}], "
        f"residuals ({f_lo}, {f_hi})"
    )
