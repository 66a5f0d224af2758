"""Right-side functions for the package's three hot orbit systems.

All kernels are written for pre-scaled inputs: callers nondimensionalize by
the orbit's (a, 1/omega) so states stay O(1); mu and c arrive in the same
units.  A compiled twin of each kernel lives in perihelion._fast; the
dispatcher in perihelion.integrate keeps the two interchangeable.

Kernels:
  rcn       state (x, u), u = (1-|v|^2/c^2)^(-1/2) v:
            dx/dt = u / sqrt(1 + |u|^2/c^2),  du/dt = -mu x / r^3.
  newton    state (x, w) against any affine parameter p:
            d^2 x / dp^2 = -mu x / r^3.
  geodesic  worldline state (x0, x, dx0/ds, dx/ds) against proper time s in
            the static metric g00 = A = 1 - 2u + 2u^2, gii = -B = -(1+2u),
            u = mu/(r c^2).
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

__all__ = ["KERNELS", "make_rhs", "rcn_rhs", "newton_rhs", "geodesic_rhs", "metric_ab"]

KERNELS = {"rcn": 6, "newton": 6, "geodesic": 8}


def rcn_rhs(mu: float, c: float) -> Callable[[float, np.ndarray], np.ndarray]:
    c2 = c * c

    def f(t: float, y: np.ndarray) -> np.ndarray:
        x = y[:3]
        u = y[3:]
        r2 = float(x @ x)
        r = math.sqrt(r2)
        gam = math.sqrt(1.0 + float(u @ u) / c2)
        out = np.empty(6)
        out[:3] = u / gam
        out[3:] = (-mu / (r2 * r)) * x
        return out

    return f


def newton_rhs(mu: float) -> Callable[[float, np.ndarray], np.ndarray]:
    def f(t: float, y: np.ndarray) -> np.ndarray:
        x = y[:3]
        r2 = float(x @ x)
        r = math.sqrt(r2)
        out = np.empty(6)
        out[:3] = y[3:]
        out[3:] = (-mu / (r2 * r)) * x
        return out

    return f


def metric_ab(r: float, mu: float, c: float) -> tuple[float, float, float, float]:
    """A, B and radial derivatives A', B' of the quadratic isotropic metric."""
    u = mu / (r * c * c)
    a = 1.0 - 2.0 * u + 2.0 * u * u
    b = 1.0 + 2.0 * u
    da = 2.0 * u * (1.0 - 2.0 * u) / r
    db = -2.0 * u / r
    return a, b, da, db


def geodesic_rhs(mu: float, c: float) -> Callable[[float, np.ndarray], np.ndarray]:
    def f(s: float, q: np.ndarray) -> np.ndarray:
        x = q[1:4]
        v0 = q[4]          # dx0/ds
        v = q[5:8]         # dx/ds
        r = math.sqrt(float(x @ x))
        a, b, da, db = metric_ab(r, mu, c)
        xdotv = float(x @ v)
        out = np.empty(8)
        out[0] = v0
        out[1:4] = v
        out[4] = -(da / a) * (xdotv / r) * v0
        out[5:8] = (-da * v0 * v0 / (2.0 * b * r)) * x - (db / (2.0 * b * r)) * (
            2.0 * xdotv * v - float(v @ v) * x
        )
        return out

    return f


def make_rhs(kernel: str, params: tuple[float, ...]) -> Callable[[float, np.ndarray], np.ndarray]:
    if kernel == "rcn":
        return rcn_rhs(*params)
    if kernel == "newton":
        return newton_rhs(*params)
    if kernel == "geodesic":
        return geodesic_rhs(*params)
    raise KeyError(f"unknown kernel {kernel!r}")
