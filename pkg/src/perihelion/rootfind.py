"""Safeguarded scalar root finding.

Newton iterations constrained to a maintained sign-change bracket, falling
back to bisection whenever a step leaves the bracket or the derivative
degenerates.  Used for Kepler-type time equations and retarded-time
conditions, both of which are smooth and nearly linear on their brackets.
"""

from __future__ import annotations

import math
from typing import Callable

__all__ = ["RootError", "newton_bracketed", "bisect", "expand_bracket"]

_MAX_BISECT = 200


class RootError(ArithmeticError):
    """No bracket, or the iteration budget ran out before convergence."""


def newton_bracketed(
    f: Callable[[float], float],
    df: Callable[[float], float],
    lo: float,
    hi: float,
    x0: float | None = None,
    xtol: float = 1e-13,
    rtol: float = 0.0,
    maxiter: int = 60,
) -> float:
    """Root of f in [lo, hi] with |step| tolerance xtol + rtol*|x|.

    f(lo) and f(hi) must not share a strict sign.  Each Newton step is
    accepted only if it stays inside the current bracket; otherwise the
    midpoint is used.  The bracket shrinks monotonically, so the method
    cannot diverge and inherits the bisection worst case.
    """
    if not lo <= hi:
        lo, hi = hi, lo
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise RootError(f"no sign change on bracket [{lo}, {hi}]: f={flo}, {fhi}")

    x = x0 if x0 is not None and lo < x0 < hi else 0.5 * (lo + hi)
    fx = f(x)
    for _ in range(maxiter):
        if fx == 0.0:
            return x
        if math.copysign(1.0, fx) == math.copysign(1.0, flo):
            lo, flo = x, fx
        else:
            hi = x
        d = df(x)
        if d != 0.0 and math.isfinite(d):
            step = -fx / d
            xn = x + step
            if not lo < xn < hi:
                xn = 0.5 * (lo + hi)
        else:
            xn = 0.5 * (lo + hi)
        step = xn - x
        x = xn
        fx = f(x)
        if abs(step) <= xtol + rtol * abs(x):
            return x
    raise RootError(f"newton_bracketed: no convergence in {maxiter} iterations (x={x}, f={fx})")


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-13,
    maxiter: int = _MAX_BISECT,
) -> float:
    """Plain bisection; assumes f(lo) and f(hi) straddle zero."""
    flo = f(lo)
    if flo == 0.0:
        return lo
    if f(hi) == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, f(hi)):
        raise RootError(f"no sign change on bracket [{lo}, {hi}]")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid == lo or mid == hi:
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if math.copysign(1.0, fm) == math.copysign(1.0, flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def expand_bracket(
    f: Callable[[float], float],
    x0: float,
    step: float,
    grow: float = 2.0,
    maxiter: int = 60,
) -> tuple[float, float]:
    """Grow [x0, x0 + step] geometrically until f changes sign across it."""
    f0 = f(x0)
    if f0 == 0.0:
        return x0, x0
    lo, hi = x0, x0 + step
    for _ in range(maxiter):
        fhi = f(hi)
        if fhi == 0.0 or math.copysign(1.0, fhi) != math.copysign(1.0, f0):
            return (lo, hi) if lo <= hi else (hi, lo)
        lo, hi = hi, x0 + (hi - x0) * grow
    raise RootError(f"expand_bracket: no sign change within {maxiter} expansions from {x0}")
