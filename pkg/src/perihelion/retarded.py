"""Causal field of a moving source and the delayed two-body problem.

A source influences an observer event only along the backward light cone:
the observed potential is the source's state at the retarded time t', the
unique earlier instant from which a light signal reaches the observer.
This module solves the retarded-time condition for arbitrary subluminal
worldlines, evaluates the resulting vector potential and field strength
(analytically, via implicit differentiation of the light-cone condition,
with a finite-difference cross-check mode), and integrates the two-body
delay system in which each body moves in the other's retarded field.

Conventions.  Coordinates are x = (x0, x1, x2, x3) with x0 = c t and
signature eta = diag(+, -, -, -).  The potential of a source with
coupling prefactor P is

    A_mu = P eta_mumu w^mu / D,   w = (c, v(t')),   D = c rho - R . v(t'),

where R = x - x_s(t') and rho = sqrt(|R|^2 + s) for a configurable
squared interval offset s >= 0 (s = 0 is the light cone itself).  The
field strength is F_munu = dA_nu/dx^mu - dA_mu/dx^nu, stored as the six
independent components so antisymmetry holds by construction.  The force
on a body of charge q and mass m moving with velocity v is

    d(Gamma v)^i/dt = (q/m) [F_i0 + sum_l v^l F_il / c].

For gravity the coupling constant is K = -G and the charges are the
masses, so a static source of mass M produces A_0 = M G / r and the
force law reduces to the relativistic Newton equation used elsewhere in
this package.  Equal-sign charges attract under K < 0 and repel under
K > 0; the sign logic lives entirely in CouplingConstant.prefactor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence, runtime_checkable

import numpy as np

from .integrate import History, StepControl, integrate_delayed
from .rootfind import RootError, bisect, newton_bracketed

__all__ = [
    "HistoryError",
    "Worldline",
    "AnalyticWorldline",
    "SampledWorldline",
    "static_worldline",
    "uniform_worldline",
    "circular_worldline",
    "CouplingConstant",
    "FourPotential",
    "FieldStrength",
    "retarded_time",
    "lw_potential",
    "field_strength",
    "four_velocity",
    "contraction_identity",
    "momentum_rate",
    "GaugeReport",
    "gauge_and_continuity_residual",
    "TwoBodySimulation",
    "causal_two_body_step",
]

# Residual target for the retarded-time solve, in metres.  Attainable only
# while c * ulp(t') stays below it; the solver polishes toward the target
# and otherwise stops at the floating-point floor.
RESIDUAL_TARGET_M = 1e-9


class HistoryError(ValueError):
    """The source worldline does not cover the needed retarded interval."""


@runtime_checkable
class Worldline(Protocol):
    """Map t -> (position, velocity, acceleration) on [t_min, t_max]."""

    t_min: float
    t_max: float

    def position(self, t: float) -> np.ndarray: ...

    def velocity(self, t: float) -> np.ndarray: ...

    def acceleration(self, t: float) -> np.ndarray: ...


class AnalyticWorldline:
    """Worldline from callables, with finite-difference derivative fallbacks.

    Missing velocity and acceleration are filled by central differences of
    the level below, with step fd_step * (1 + |t|).  Subluminality is the
    caller's responsibility for analytic worldlines.
    """

    def __init__(
        self,
        position: Callable[[float], np.ndarray],
        velocity: Callable[[float], np.ndarray] | None = None,
        acceleration: Callable[[float], np.ndarray] | None = None,
        t_min: float = -math.inf,
        t_max: float = math.inf,
        fd_step: float = 1e-6,
    ) -> None:
        self._position = position
        self._velocity = velocity
        self._acceleration = acceleration
        self.t_min = t_min
        self.t_max = t_max
        self._fd = fd_step

    def position(self, t: float) -> np.ndarray:
        return np.asarray(self._position(t), dtype=float)

    def velocity(self, t: float) -> np.ndarray:
        if self._velocity is not None:
            return np.asarray(self._velocity(t), dtype=float)
        h = self._fd * (1.0 + abs(t))
        return (self.position(t + h) - self.position(t - h)) / (2.0 * h)

    def acceleration(self, t: float) -> np.ndarray:
        if self._acceleration is not None:
            return np.asarray(self._acceleration(t), dtype=float)
        if self._velocity is not None:
            h = self._fd * (1.0 + abs(t))
            return (self.velocity(t + h) - self.velocity(t - h)) / (2.0 * h)
        # doubled difference of position; wider stencil, or round-off noise
        # grows as ulp/h^2 and swamps the estimate
        h = math.sqrt(self._fd) * (1.0 + abs(t))
        return (self.position(t + h) - 2.0 * self.position(t) + self.position(t - h)) / (h * h)


class SampledWorldline:
    """Worldline interpolated from (t, x, v) samples.

    order=3 builds the cubic matching positions and velocities at both ends
    of each interval; velocity and acceleration are its exact derivatives,
    so the three channels stay mutually consistent.  order=1 interpolates
    x and v linearly and takes the per-interval slope of v as acceleration.
    Passing c enables a subluminality check on the velocity samples.
    """

    def __init__(
        self,
        times: Sequence[float],
        positions: Sequence[Sequence[float]],
        velocities: Sequence[Sequence[float]],
        order: int = 3,
        c: float | None = None,
    ) -> None:
        t = np.asarray(times, dtype=float)
        x = np.asarray(positions, dtype=float)
        v = np.asarray(velocities, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("need at least two samples")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("sample times must increase strictly")
        if x.shape != (t.size, 3) or v.shape != (t.size, 3):
            raise ValueError("positions and velocities must be (n, 3)")
        if order not in (1, 3):
            raise ValueError(f"interpolation order must be 1 or 3, got {order}")
        if c is not None:
            speed = np.sqrt(np.sum(v * v, axis=1)).max()
            if not speed < c:
                raise ValueError(f"sampled speed {speed} is not below c={c}")
        self._t = t
        self._x = x
        self._v = v
        self.order = order
        self.t_min = float(t[0])
        self.t_max = float(t[-1])

    def _interval(self, t: float) -> tuple[int, float, float]:
        if t < self.t_min or t > self.t_max:
            raise ValueError(f"t={t} outside sampled range [{self.t_min}, {self.t_max}]")
        i = int(np.searchsorted(self._t, t, side="right")) - 1
        i = min(max(i, 0), self._t.size - 2)
        h = float(self._t[i + 1] - self._t[i])
        return i, (t - float(self._t[i])) / h, h

    def position(self, t: float) -> np.ndarray:
        i, s, h = self._interval(t)
        x0, x1 = self._x[i], self._x[i + 1]
        if self.order == 1:
            return x0 + s * (x1 - x0)
        v0, v1 = self._v[i], self._v[i + 1]
        s2, s3 = s * s, s * s * s
        return (
            (2.0 * s3 - 3.0 * s2 + 1.0) * x0
            + (s3 - 2.0 * s2 + s) * h * v0
            + (-2.0 * s3 + 3.0 * s2) * x1
            + (s3 - s2) * h * v1
        )

    def velocity(self, t: float) -> np.ndarray:
        i, s, h = self._interval(t)
        v0, v1 = self._v[i], self._v[i + 1]
        if self.order == 1:
            return v0 + s * (v1 - v0)
        x0, x1 = self._x[i], self._x[i + 1]
        s2 = s * s
        return (
            (6.0 * s2 - 6.0 * s) * (x0 - x1) / h
            + (3.0 * s2 - 4.0 * s + 1.0) * v0
            + (3.0 * s2 - 2.0 * s) * v1
        )

    def acceleration(self, t: float) -> np.ndarray:
        i, s, h = self._interval(t)
        v0, v1 = self._v[i], self._v[i + 1]
        if self.order == 1:
            return (v1 - v0) / h
        x0, x1 = self._x[i], self._x[i + 1]
        return (
            (12.0 * s - 6.0) * (x0 - x1) / (h * h)
            + (6.0 * s - 4.0) * v0 / h
            + (6.0 * s - 2.0) * v1 / h
        )


def static_worldline(x: Sequence[float]) -> AnalyticWorldline:
    """Source at rest at x for all time."""
    x0 = np.asarray(x, dtype=float).copy()
    zero = np.zeros(3)
    return AnalyticWorldline(
        position=lambda t: x0,
        velocity=lambda t: zero,
        acceleration=lambda t: zero,
    )


def uniform_worldline(x0: Sequence[float], v: Sequence[float], t_ref: float = 0.0) -> AnalyticWorldline:
    """Source moving in a straight line: x(t) = x0 + v (t - t_ref)."""
    p0 = np.asarray(x0, dtype=float).copy()
    vel = np.asarray(v, dtype=float).copy()
    zero = np.zeros(3)
    return AnalyticWorldline(
        position=lambda t: p0 + vel * (t - t_ref),
        velocity=lambda t: vel,
        acceleration=lambda t: zero,
    )


def circular_worldline(
    radius: float,
    omega: float,
    center: Sequence[float] = (0.0, 0.0, 0.0),
    phase: float = 0.0,
) -> AnalyticWorldline:
    """Uniform circular motion in the xy plane about center."""
    c0 = np.asarray(center, dtype=float).copy()

    def pos(t: float) -> np.ndarray:
        ang = omega * t + phase
        return c0 + radius * np.array([math.cos(ang), math.sin(ang), 0.0])

    def vel(t: float) -> np.ndarray:
        ang = omega * t + phase
        return radius * omega * np.array([-math.sin(ang), math.cos(ang), 0.0])

    def acc(t: float) -> np.ndarray:
        ang = omega * t + phase
        return -radius * omega * omega * np.array([math.cos(ang), math.sin(ang), 0.0])

    return AnalyticWorldline(position=pos, velocity=vel, acceleration=acc)


@dataclass(frozen=True)
class CouplingConstant:
    """Interaction constant K together with the two charges.

    The potential of source j carries the prefactor -K q_j, so A_0 of a
    static source is -K q_j / r.  With K = -G and charges equal to the
    masses this is the gravitational M G / r; equal-sign charges then
    attract.  A positive K with like charges (the Coulomb arrangement)
    repels.  Attraction holds exactly when q_k q_j K < 0.
    """

    K: float
    charges: tuple[float, float]

    @classmethod
    def gravity(cls, m1: float, m2: float, G: float) -> "CouplingConstant":
        return cls(K=-G, charges=(float(m1), float(m2)))

    def prefactor(self, j: int) -> float:
        return -self.K * self.charges[j]

    @property
    def pair_product(self) -> float:
        """K q_1 q_2, the coefficient of 1/r in the interaction energy."""
        return self.K * self.charges[0] * self.charges[1]


@dataclass(frozen=True)
class FourPotential:
    """Potential components A_mu at one observer event.

    components[0] is A_0 and components[1:] are A_1..A_3 (lower index,
    signature factors already applied).  t_retarded and denominator are
    the solved emission time and D = c rho - R . v at it.
    """

    components: np.ndarray
    t_retarded: float
    denominator: float


@dataclass(frozen=True)
class FieldStrength:
    """Antisymmetric field tensor stored as its six independent components.

    time_space  = (F_10, F_20, F_30)
    space_space = (F_23, F_31, F_12)
    """

    time_space: np.ndarray
    space_space: np.ndarray

    def matrix(self) -> np.ndarray:
        """Full 4x4 array F_munu; antisymmetry is exact by assembly."""
        f10, f20, f30 = self.time_space
        f23, f31, f12 = self.space_space
        return np.array(
            [
                [0.0, -f10, -f20, -f30],
                [f10, 0.0, f12, -f31],
                [f20, -f12, 0.0, f23],
                [f30, f31, -f23, 0.0],
            ]
        )


def _light_cone_gap(
    t: float,
    x: np.ndarray,
    source: Worldline,
    c: float,
    squared_interval: float,
    tp: float,
) -> float:
    # f(t') = c (t - t') - rho(t'); strictly decreasing in t' for subluminal
    # sources, so it has exactly one root below t.
    R = x - source.position(tp)
    return c * (t - tp) - math.sqrt(float(R @ R) + squared_interval)


def retarded_time(
    t: float,
    x: Sequence[float],
    source: Worldline,
    c: float,
    squared_interval: float = 0.0,
) -> float:
    """Emission time t' < t with c (t - t') = sqrt(|x - x_s(t')|^2 + s).

    Bracketing walks backward from min(t, source.t_max), doubling the span
    until the light-cone gap changes sign; subluminality guarantees this
    terminates and makes the root unique, which the bracket assertion
    checks.  The root is then found by safeguarded Newton (40 iterations,
    1e-12 relative in t, bisection fallback) and polished toward a gap
    below RESIDUAL_TARGET_M metres where the floating-point spacing of t'
    allows it.
    """
    if squared_interval < 0.0:
        raise ValueError("squared_interval must be >= 0")
    if not c > 0.0:
        raise ValueError("c must be positive")
    xv = np.asarray(x, dtype=float)

    def f(tp: float) -> float:
        return _light_cone_gap(t, xv, source, c, squared_interval, tp)

    def fp(tp: float) -> float:
        R = xv - source.position(tp)
        rho = math.sqrt(float(R @ R) + squared_interval)
        if rho == 0.0:
            return -c
        return -c + float(R @ source.velocity(tp)) / rho

    t_hi = min(t, source.t_max)
    f_hi = f(t_hi)
    if f_hi == 0.0:
        return t_hi
    if f_hi > 0.0:
        # the root sits between t_hi and t, outside the recorded span
        raise HistoryError(
            f"retarded time for observer t={t} lies beyond the source range "
            f"(t_max={source.t_max})"
        )

    step = max(-f_hi / c, 1e-6 * (1.0 + abs(t_hi)))
    t_lo = t_hi - step
    f_lo = None
    for _ in range(120):
        if t_lo < source.t_min:
            t_lo = source.t_min
        f_lo = f(t_lo)
        if f_lo >= 0.0:
            break
        if t_lo == source.t_min:
            raise HistoryError(
                f"source worldline too short: no emission point above t_min={source.t_min}"
            )
        step *= 2.0
        t_lo = t_hi - step
    else:
        raise HistoryError("bracket expansion failed; is the source subluminal?")
    if f_lo == 0.0:
        return t_lo
    # exactly one sign change on [t_lo, t_hi]: monotone gap, checked ends
    assert f_lo > 0.0 > f_hi, "retarded bracket lost its single sign change"

    try:
        tp = newton_bracketed(f, fp, t_lo, t_hi, xtol=1e-18, rtol=1e-12, maxiter=40)
    except RootError:
        tp = bisect(f, t_lo, t_hi, xtol=1e-18)

    # polish to the floating-point floor of the gap; where c * ulp(t')
    # exceeds RESIDUAL_TARGET_M the target is unattainable and the last
    # improving iterate is returned instead
    best = tp
    fb = f(best)
    gap = abs(fb)
    gap_floor = 4.0 * c * math.ulp(max(abs(best), abs(t_hi), 1e-9))
    for _ in range(6):
        if gap <= gap_floor:
            break
        d = fp(best)
        if d == 0.0 or not math.isfinite(d):
            break
        cand = best - fb / d
        fc = f(cand)
        if abs(fc) >= gap:
            break
        best, fb, gap = cand, fc, abs(fc)
    return best


def _emission_geometry(
    t: float,
    x: np.ndarray,
    source: Worldline,
    c: float,
    squared_interval: float,
) -> tuple[float, np.ndarray, float, np.ndarray, float]:
    tp = retarded_time(t, x, source, c, squared_interval)
    R = x - source.position(tp)
    rho = math.sqrt(float(R @ R) + squared_interval)
    v = source.velocity(tp)
    D = c * rho - float(R @ v)
    assert D > 0.0, "non-positive denominator: superluminal source or observer on the worldline"
    return tp, R, rho, v, D


def lw_potential(
    t: float,
    x: Sequence[float],
    source: Worldline,
    prefactor: float,
    c: float,
    squared_interval: float = 0.0,
) -> FourPotential:
    """Potential A_mu = prefactor * eta_mumu w^mu / D at the observer event.

    w = (c, v(t')) is the source four-velocity-per-dt and D the retarded
    denominator; a static source of prefactor P gives A_0 = P / r exactly
    and zero spatial components.
    """
    xv = np.asarray(x, dtype=float)
    if prefactor == 0.0:
        return FourPotential(components=np.zeros(4), t_retarded=math.nan, denominator=math.nan)
    tp, R, rho, v, D = _emission_geometry(t, xv, source, c, squared_interval)
    components = np.empty(4)
    components[0] = prefactor * c / D
    components[1:] = -prefactor * v / D
    return FourPotential(components=components, t_retarded=tp, denominator=D)


def _analytic_gradients(
    t: float,
    x: np.ndarray,
    source: Worldline,
    prefactor: float,
    c: float,
    squared_interval: float,
) -> np.ndarray:
    """grads[nu, mu] = dA_mu/dx^nu via implicit differentiation of the cone.

    The emission time responds to the observer event as dt'/dx^0 = rho/D
    and dt'/dx^i = -R_i/D; everything else is the chain rule through
    D(t', x).
    """
    tp, R, rho, v, D = _emission_geometry(t, x, source, c, squared_interval)
    a = source.acceleration(tp)

    dtp = np.empty(4)
    dtp[0] = rho / D
    dtp[1:] = -R / D

    # D = c rho - R.v with rho' = -(R.v)/rho along the worldline
    dD_dtp = -c * float(R @ v) / rho + float(v @ v) - float(R @ a)
    dD = dD_dtp * dtp
    dD[1:] += c * R / rho - v

    # A_mu = P eta w / D, eta w = (c, -v), d(eta w)/dt' = (0, -a)
    eta_w = np.empty(4)
    eta_w[0] = c
    eta_w[1:] = -v
    eta_wdot = np.zeros(4)
    eta_wdot[1:] = -a

    grads = np.empty((4, 4))
    for nu in range(4):
        grads[nu] = prefactor * (eta_wdot * dtp[nu] / D - eta_w * dD[nu] / (D * D))
    return grads


def _fd_gradients(
    t: float,
    x: np.ndarray,
    source: Worldline,
    prefactor: float,
    c: float,
    squared_interval: float,
    h: float,
) -> np.ndarray:
    """Central-difference version of the potential gradients at spacing h."""
    grads = np.empty((4, 4))
    dt = h / c
    ap = lw_potential(t + dt, x, source, prefactor, c, squared_interval).components
    am = lw_potential(t - dt, x, source, prefactor, c, squared_interval).components
    grads[0] = (ap - am) / (2.0 * h)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        ap = lw_potential(t, x + e, source, prefactor, c, squared_interval).components
        am = lw_potential(t, x - e, source, prefactor, c, squared_interval).components
        grads[i + 1] = (ap - am) / (2.0 * h)
    return grads


def field_strength(
    t: float,
    x: Sequence[float],
    source: Worldline,
    prefactor: float,
    c: float,
    mode: str = "analytic",
    fd_step: float | None = None,
    squared_interval: float = 0.0,
) -> FieldStrength:
    """F_munu = dA_nu/dx^mu - dA_mu/dx^nu at the observer event.

    mode="analytic" differentiates the closed-form potential through the
    light-cone condition; mode="fd" is the cross-check, Richardson-combined
    central differences with spacing fd_step (default 1e-3 times the
    retarded distance).  A static source of prefactor P reduces to
    F_i0 = -P x^i/r^3 with vanishing magnetic part.
    """
    xv = np.asarray(x, dtype=float)
    if prefactor == 0.0:
        return FieldStrength(time_space=np.zeros(3), space_space=np.zeros(3))
    if mode == "analytic":
        grads = _analytic_gradients(t, xv, source, prefactor, c, squared_interval)
    elif mode == "fd":
        if fd_step is None:
            _, _, rho, _, _ = _emission_geometry(t, xv, source, c, squared_interval)
            fd_step = 1e-3 * rho
        g1 = _fd_gradients(t, xv, source, prefactor, c, squared_interval, fd_step)
        g2 = _fd_gradients(t, xv, source, prefactor, c, squared_interval, 0.5 * fd_step)
        grads = (4.0 * g2 - g1) / 3.0
    else:
        raise ValueError(f"unknown mode {mode!r}: expected 'analytic' or 'fd'")

    def f(mu: int, nu: int) -> float:
        return grads[mu, nu] - grads[nu, mu]

    return FieldStrength(
        time_space=np.array([f(1, 0), f(2, 0), f(3, 0)]),
        space_space=np.array([f(2, 3), f(3, 1), f(1, 2)]),
    )


def four_velocity(v: Sequence[float], c: float) -> np.ndarray:
    """u = (Gamma, Gamma v / c), normalized so sum eta_aa (u^a)^2 = 1."""
    vv = np.asarray(v, dtype=float)
    beta_sq = float(vv @ vv) / (c * c)
    if not beta_sq < 1.0:
        raise ValueError(f"speed not below c: |v|^2/c^2 = {beta_sq}")
    gamma = 1.0 / math.sqrt(1.0 - beta_sq)
    u = np.empty(4)
    u[0] = gamma
    u[1:] = gamma * vv / c
    return u


def contraction_identity(F: FieldStrength, u: Sequence[float]) -> float:
    """sum_munu F_munu u^mu u^nu; zero to round-off for antisymmetric F."""
    uv = np.asarray(u, dtype=float)
    return float(uv @ F.matrix() @ uv)


def momentum_rate(F: FieldStrength, v: Sequence[float], charge_to_mass: float, c: float) -> np.ndarray:
    """d(Gamma v)/dt = (q/m) [F_i0 + (v x space_space)_i / c]."""
    vv = np.asarray(v, dtype=float)
    return charge_to_mass * (F.time_space + np.cross(vv, F.space_space) / c)


@dataclass(frozen=True)
class GaugeReport:
    """Gauge-sum residuals on a probe grid over a refinement ladder.

    residuals[k, l] is d0 A0 - sum_i di Ai at event k with spacing
    spacings[k, l] (central differences).  orders[l] compares the max
    residual at consecutive levels; the static field is divergence-free
    to round-off, so its orders are reported as nan.
    """

    events: np.ndarray
    spacings: np.ndarray
    residuals: np.ndarray
    max_residuals: np.ndarray
    orders: np.ndarray

    def as_dict(self) -> dict:
        return {
            "events": self.events.tolist(),
            "spacings": self.spacings.tolist(),
            "residuals": self.residuals.tolist(),
            "max_residuals": self.max_residuals.tolist(),
            "orders": [None if math.isnan(o) else o for o in self.orders],
        }


def gauge_and_continuity_residual(
    source: Worldline,
    prefactor: float,
    c: float,
    events: Sequence[tuple[float, Sequence[float]]],
    h0: float | None = None,
    levels: int = 3,
) -> GaugeReport:
    """Numerical residual of the gauge sum d0 A0 - sum_i di Ai.

    The potential is built so this sum vanishes identically; its vanishing
    is the field-side witness of source-current continuity, so one residual
    covers both statements.  Central differences at spacings h0, h0/2, ...
    (default h0 = 1e-3 times the retarded distance per event) quantify how
    fast the discretized sum converges to zero.
    """
    if levels < 2:
        raise ValueError("need at least two refinement levels")
    ev = [(float(t), np.asarray(x, dtype=float)) for t, x in events]
    spacings = np.empty((len(ev), levels))
    residuals = np.empty((len(ev), levels))
    for k, (t, x) in enumerate(ev):
        if h0 is None:
            _, _, rho, _, _ = _emission_geometry(t, x, source, c, 0.0)
            h_top = 1e-3 * rho
        else:
            h_top = h0
        for l in range(levels):
            h = h_top / 2.0**l
            grads = _fd_gradients(t, x, source, prefactor, c, 0.0, h)
            spacings[k, l] = h
            residuals[k, l] = grads[0, 0] - grads[1, 1] - grads[2, 2] - grads[3, 3]
    max_res = np.abs(residuals).max(axis=0)
    orders = np.empty(levels - 1)
    for l in range(levels - 1):
        if max_res[l] > 0.0 and max_res[l + 1] > 0.0:
            orders[l] = math.log2(max_res[l] / max_res[l + 1])
        else:
            orders[l] = math.nan
    events_arr = np.array([[t, *x] for t, x in ev])
    return GaugeReport(
        events=events_arr,
        spacings=spacings,
        residuals=residuals,
        max_residuals=max_res,
        orders=orders,
    )


class _TrackView:
    """Worldline view over one body's slice of a delay History.

    Velocity is recovered algebraically from the stored celerity u = Gamma v;
    acceleration is a finite difference of that velocity (the dense output
    carries no derivative channel), backward-shifted near the frontier so
    the stencil never queries the future.
    """

    def __init__(self, history: History, offset: int, c: float, accel_step: float) -> None:
        self._history = history
        self._off = offset
        self._c = c
        self._h = accel_step
        self.t_min = -math.inf
        self.t_max = history.frontier

    def position(self, t: float) -> np.ndarray:
        return self._history(t)[self._off : self._off + 3]

    def velocity(self, t: float) -> np.ndarray:
        u = self._history(t)[self._off + 3 : self._off + 6]
        return u / math.sqrt(1.0 + float(u @ u) / (self._c * self._c))

    def acceleration(self, t: float) -> np.ndarray:
        h = self._h
        if t + h <= self.t_max:
            return (self.velocity(t + h) - self.velocity(t - h)) / (2.0 * h)
        # 3-point backward difference, O(h^2)
        return (3.0 * self.velocity(t) - 4.0 * self.velocity(t - h) + self.velocity(t - 2.0 * h)) / (
            2.0 * h
        )


class TwoBodySimulation:
    """Two bodies coupled through each other's retarded field.

    State per body is (position, celerity u = Gamma v); the force on body k
    evaluates the field of body j at k's current event using j's recorded
    history, so every interaction respects the light-travel delay.  Before
    the start time each body is assumed to have moved inertially (straight
    line at its initial velocity); that warm-up assumption is this
    simulation's, not a property of the model, and is echoed in reports.

    No exact conserved energy is known for the delay system; energy()
    evaluates the instantaneous two-body energy-like sum
    sum_k m_k c^2 (Gamma_k - 1) + K q_1 q_2 / r for drift monitoring only.
    """

    def __init__(
        self,
        coupling: CouplingConstant,
        masses: tuple[float, float],
        x1: Sequence[float],
        v1: Sequence[float],
        x2: Sequence[float],
        v2: Sequence[float],
        c: float,
        t0: float = 0.0,
        ctrl: StepControl | None = None,
        accel_step: float | None = None,
    ) -> None:
        self.coupling = coupling
        self.masses = (float(masses[0]), float(masses[1]))
        if self.masses[0] <= 0.0 or self.masses[1] <= 0.0:
            raise ValueError("masses must be positive")
        self.c = float(c)
        y0 = np.empty(12)
        for off, (x, v) in ((0, (x1, v1)), (6, (x2, v2))):
            xv = np.asarray(x, dtype=float)
            vv = np.asarray(v, dtype=float)
            beta_sq = float(vv @ vv) / (self.c * self.c)
            if not beta_sq < 1.0:
                raise ValueError("initial speed must be below c")
            gamma = 1.0 / math.sqrt(1.0 - beta_sq)
            y0[off : off + 3] = xv
            y0[off + 3 : off + 6] = gamma * vv
        sep = float(np.linalg.norm(y0[0:3] - y0[6:9]))
        if sep == 0.0:
            raise ValueError("bodies must start at distinct positions")
        self.ctrl = ctrl if ctrl is not None else StepControl(rtol=1e-10, atol=1e-12)

        def prehistory(t: float, y0=y0.copy(), t0=t0, c=self.c) -> np.ndarray:
            y = y0.copy()
            for off in (0, 6):
                u = y0[off + 3 : off + 6]
                v = u / math.sqrt(1.0 + float(u @ u) / (c * c))
                y[off : off + 3] = y0[off : off + 3] + v * (t - t0)
            return y

        self.history = History(prehistory, t0)
        self._accel_step = accel_step
        self._accel_h = 0.0

    @property
    def time(self) -> float:
        return self.history.frontier

    def state(self, t: float | None = None) -> np.ndarray:
        if t is None:
            return self.history.last_state()
        return self.history(t)

    def body_state(self, k: int, t: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Position and velocity of body k (0 or 1) at time t (default: now)."""
        y = self.state(t)
        off = 6 * k
        x = y[off : off + 3]
        u = y[off + 3 : off + 6]
        v = u / math.sqrt(1.0 + float(u @ u) / (self.c * self.c))
        return x, v

    def separation(self, t: float | None = None) -> float:
        y = self.state(t)
        return float(np.linalg.norm(y[0:3] - y[6:9]))

    def _lag_floor(self) -> float:
        # half the current light-crossing time; bodies that halve their
        # separation inside one advance need an explicit, smaller lag
        return 0.5 * self.separation() / self.c

    def _rhs(self, t: float, y: np.ndarray, past: History) -> np.ndarray:
        c = self.c
        out = np.empty(12)
        accel_h = self._accel_h
        for k in (0, 1):
            j = 1 - k
            off_k, off_j = 6 * k, 6 * j
            xk = y[off_k : off_k + 3]
            uk = y[off_k + 3 : off_k + 6]
            vk = uk / math.sqrt(1.0 + float(uk @ uk) / (c * c))
            src = _TrackView(past, off_j, c, accel_h)
            F = field_strength(t, xk, src, self.coupling.prefactor(j), c)
            qm = self.coupling.charges[k] / self.masses[k]
            out[off_k : off_k + 3] = vk
            out[off_k + 3 : off_k + 6] = momentum_rate(F, vk, qm, c)
        return out

    def step(self, dt: float, lag_floor: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Advance both bodies by dt; returns the two advanced (x, v) pairs.

        The advance is windowed below the light-travel lag so every retarded
        lookup lands in finished history; a lag_floor override is needed
        only when the separation shrinks a lot within one call.
        """
        if not dt > 0.0:
            raise ValueError("dt must be positive")
        lag = lag_floor if lag_floor is not None else self._lag_floor()
        if not lag > 0.0:
            raise ValueError("lag floor must be positive")
        self._accel_h = self._accel_step if self._accel_step is not None else 1e-3 * lag
        integrate_delayed(self.history, self._rhs, self.ctrl, self.time + dt, lag)
        x1, v1 = self.body_state(0)
        x2, v2 = self.body_state(1)
        return (np.concatenate([x1, v1]), np.concatenate([x2, v2]))

    def energy(self, t: float | None = None) -> float:
        """Instantaneous energy-like sum; reported for drift, not conserved."""
        y = self.state(t)
        c2 = self.c * self.c
        total = self.coupling.pair_product / float(np.linalg.norm(y[0:3] - y[6:9]))
        for k, off in ((0, 0), (1, 6)):
            u = y[off + 3 : off + 6]
            gamma = math.sqrt(1.0 + float(u @ u) / c2)
            # Gamma - 1 via u^2 to dodge cancellation at small speeds
            total += self.masses[k] * float(u @ u) / (gamma + 1.0)
        return total

    def sample(self, ts: Sequence[float]) -> np.ndarray:
        """States at the given times (rows of [x1 u1 x2 u2])."""
        return np.array([self.history(float(t)) for t in ts])


def causal_two_body_step(
    sim: TwoBodySimulation, dt: float, lag_floor: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Advance a two-body delay simulation by dt; returns advanced (x, v) pairs."""
    return sim.step(dt, lag_floor=lag_floor)
