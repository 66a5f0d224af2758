"""Adaptive embedded Runge-Kutta 5(4) with dense output and event location.

One explicit pair drives everything: the fifth-order solution propagates,
the embedded fourth-order solution controls the step, and a free quartic
interpolant provides dense output on every accepted step.  Events are
scalar functions of (t, state) whose sign changes are located by bisection
on that interpolant.

A method-of-steps variant handles right sides that look up the solution's
own past (delay systems), with the step size capped below the smallest
delay so each step only reads history that is already final.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "IntegrationError",
    "StepSizeUnderflow",
    "MaxStepsExceeded",
    "NonFiniteDerivative",
    "HistoryUnderrun",
    "OdeProblem",
    "StepControl",
    "EventSpec",
    "EventHit",
    "Solution",
    "History",
    "integrate",
    "integrate_delayed",
]


class IntegrationError(RuntimeError):
    pass


class StepSizeUnderflow(IntegrationError):
    pass


class MaxStepsExceeded(IntegrationError):
    pass


class NonFiniteDerivative(IntegrationError):
    pass


class HistoryUnderrun(IntegrationError):
    """A delayed right side asked for past state that is not yet final."""


# Dormand-Prince 5(4) coefficients.
C2, C3, C4, C5, C6 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# fifth-order weights minus the embedded fourth-order weights
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
# continuous-extension weights: y(t0 + theta h) = y0 + h sum_j theta^(j+1) Q_j
# with Q_j = sum_s P[s][j] k_s; column sums reproduce the fifth-order weights
P1 = (1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
      -12715105075.0 / 11282082432.0)
P3 = (0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
      87487479700.0 / 32700410799.0)
P4 = (0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
      -10690763975.0 / 1880347072.0)
P5 = (0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
      701980252875.0 / 199316789632.0)
P6 = (0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
      -1453857185.0 / 822651844.0)
P7 = (0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
      69997945.0 / 29380423.0)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_ORDER_EXP = 0.2  # 1 / 5


@dataclass
class OdeProblem:
    rhs: Callable[[float, np.ndarray], np.ndarray]
    y0: np.ndarray
    t0: float
    t1: float

    def __post_init__(self) -> None:
        self.y0 = np.asarray(self.y0, dtype=float)
        if self.y0.ndim != 1 or self.y0.size == 0:
            raise ValueError("y0 must be a nonempty 1-d array")
        if not (self.t1 > self.t0):
            raise ValueError(f"need t1 > t0, got [{self.t0}, {self.t1}]")

    @property
    def dimension(self) -> int:
        return self.y0.size


@dataclass
class StepControl:
    rtol: float = 1e-10
    atol: float = 1e-12
    h0: float | None = None
    hmax: float = math.inf
    max_steps: int = 2_000_000
    fixed_step: float | None = None  # disables adaptivity when set

    def __post_init__(self) -> None:
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise ValueError("tolerances must be positive")
        if self.fixed_step is not None and not self.fixed_step > 0.0:
            raise ValueError("fixed_step must be positive")


@dataclass
class EventSpec:
    g: Callable[[float, np.ndarray], float]
    direction: int = 0  # +1 rising, -1 falling, 0 any crossing
    terminal: bool = False
    name: str = ""


@dataclass
class EventHit:
    index: int
    t: float
    y: np.ndarray
    name: str = ""


def _dense_eval(cont: np.ndarray, theta: float) -> np.ndarray:
    """cont rows (y0, h Q0, h Q1, h Q2, h Q3); quartic in theta on [0, 1]."""
    return cont[0] + theta * (
        cont[1] + theta * (cont[2] + theta * (cont[3] + theta * cont[4]))
    )


class Solution:
    """Accepted-step mesh, dense interpolant, and event log of one run."""

    def __init__(
        self,
        ts: np.ndarray,
        nodes: np.ndarray,
        conts: np.ndarray,
        events: list[EventHit],
        stats: dict[str, int],
        segment_times: np.ndarray | None = None,
    ) -> None:
        self.ts = ts
        self.nodes = nodes
        self.conts = conts
        self.events = events
        self.stats = stats
        # a terminal event truncates the node list; the last interpolant
        # still spans its full accepted step
        self._segment_times = ts if segment_times is None else segment_times

    @property
    def t0(self) -> float:
        return float(self.ts[0])

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    @property
    def y_end(self) -> np.ndarray:
        return self.nodes[-1]

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        tq = np.atleast_1d(t_arr)
        lo, hi = self.ts[0], self.ts[-1]
        if np.any(tq < lo - 1e-12 * (hi - lo)) or np.any(tq > hi + 1e-12 * (hi - lo)):
            raise ValueError(f"query outside [{lo}, {hi}]")
        # segment mesh may end (terminal event) before the last full step
        idx = np.clip(np.searchsorted(self._seg_ts, tq, side="right") - 1, 0, len(self.conts) - 1)
        out = np.empty((tq.size, self.nodes.shape[1]))
        for j, (ti, i) in enumerate(zip(tq, idx)):
            h = self._seg_ts[i + 1] - self._seg_ts[i]
            theta = (ti - self._seg_ts[i]) / h
            out[j] = _dense_eval(self.conts[i], theta)
        return out[0] if scalar else out

    @property
    def _seg_ts(self) -> np.ndarray:
        return self._segment_times


def _hinit(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    f0: np.ndarray,
    span: float,
    rtol: float,
    atol: float,
) -> tuple[float, int]:
    """Conventional two-probe starting step size (deterministic)."""
    scale = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6 * span
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * f0
    f1 = rhs(t0 + h0, y1)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6 * span, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** _ORDER_EXP
    # a state starting near the origin makes d0/d1 meaningless; floor the
    # guess and let the controller grow from there
    return max(min(100.0 * h0, h1, span), 1e-12 * max(span, abs(t0))), 1


def _locate_event(
    spec: EventSpec,
    ta: float,
    tb: float,
    ga: float,
    gb: float,
    cont: np.ndarray,
    tol_t: float,
) -> float:
    """Bisect the interpolant for the sign change of g inside [ta, tb]."""
    h = tb - ta
    lo_th, hi_th = 0.0, 1.0
    glo = ga
    while (hi_th - lo_th) * h > tol_t:
        mid = 0.5 * (lo_th + hi_th)
        gm = spec.g(ta + mid * h, _dense_eval(cont, mid))
        if gm == 0.0:
            return ta + mid * h
        if math.copysign(1.0, gm) == math.copysign(1.0, glo):
            lo_th, glo = mid, gm
        else:
            hi_th = mid
    return ta + 0.5 * (lo_th + hi_th) * h


def _crossed(direction: int, ga: float, gb: float) -> bool:
    if direction >= 0 and ga < 0.0 and gb >= 0.0:
        return True
    if direction <= 0 and ga > 0.0 and gb <= 0.0:
        return True
    return False


def integrate(
    problem: OdeProblem,
    ctrl: StepControl | None = None,
    events: Sequence[EventSpec] = (),
) -> Solution:
    """Propagate the problem over its span; returns mesh, dense data, events.

    Raises StepSizeUnderflow, MaxStepsExceeded, or NonFiniteDerivative when
    the run cannot complete within the control settings.
    """
    if ctrl is None:
        ctrl = StepControl()
    rhs = problem.rhs
    t0, t1 = problem.t0, problem.t1
    span = t1 - t0
    y = problem.y0.copy()
    dim = y.size

    nfev = 1
    f = rhs(t0, y)
    f = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f)):
        raise NonFiniteDerivative(f"right side not finite at t0={t0}")

    if ctrl.fixed_step is not None:
        h = min(ctrl.fixed_step, span)
    elif ctrl.h0 is not None:
        h = min(ctrl.h0, ctrl.hmax, span)
    else:
        h, extra = _hinit(rhs, t0, y, f, span, ctrl.rtol, ctrl.atol)
        h = min(h, ctrl.hmax)
        nfev += extra

    ts = [t0]
    nodes = [y.copy()]
    conts: list[np.ndarray] = []
    hits: list[EventHit] = []
    g_prev = [e.g(t0, y) for e in events]

    t = t0
    naccept = nreject = 0
    tol_t = 1e-12 * span
    terminal_hit = None
    k = np.empty((7, dim))
    k[0] = f

    while t < t1:
        if naccept + nreject >= ctrl.max_steps:
            raise MaxStepsExceeded(f"max_steps={ctrl.max_steps} exhausted at t={t}")
        last = t + h >= t1
        if last:
            h = t1 - t
        else:
            hmin = 1e-14 * max(abs(t), span)
            if h < hmin and ctrl.fixed_step is None:
                raise StepSizeUnderflow(f"step {h} below {hmin} at t={t}")

        k[1] = rhs(t + C2 * h, y + h * (A21 * k[0]))
        k[2] = rhs(t + C3 * h, y + h * (A31 * k[0] + A32 * k[1]))
        k[3] = rhs(t + C4 * h, y + h * (A41 * k[0] + A42 * k[1] + A43 * k[2]))
        k[4] = rhs(t + C5 * h, y + h * (A51 * k[0] + A52 * k[1] + A53 * k[2] + A54 * k[3]))
        k[5] = rhs(
            t + C6 * h,
            y + h * (A61 * k[0] + A62 * k[1] + A63 * k[2] + A64 * k[3] + A65 * k[4]),
        )
        ynew = y + h * (B1 * k[0] + B3 * k[2] + B4 * k[3] + B5 * k[4] + B6 * k[5])
        k[6] = rhs(t + h, ynew)
        nfev += 6
        if not (np.all(np.isfinite(ynew)) and np.all(np.isfinite(k[6]))):
            raise NonFiniteDerivative(f"state or right side not finite near t={t + h}")

        err = h * (E1 * k[0] + E3 * k[2] + E4 * k[3] + E5 * k[4] + E6 * k[5] + E7 * k[6])
        scale = ctrl.atol + ctrl.rtol * np.maximum(np.abs(y), np.abs(ynew))
        errnorm = math.sqrt(float(np.mean((err / scale) ** 2)))

        if ctrl.fixed_step is None and errnorm > 1.0:
            nreject += 1
            h *= max(_MIN_FACTOR, _SAFETY * errnorm**-_ORDER_EXP)
            continue

        # accepted: assemble the interpolant for [t, t+h]
        cont = np.empty((5, dim))
        cont[0] = y
        for j in range(4):
            cont[j + 1] = h * (
                P1[j] * k[0] + P3[j] * k[2] + P4[j] * k[3] + P5[j] * k[4]
                + P6[j] * k[5] + P7[j] * k[6]
            )
        conts.append(cont)
        naccept += 1
        tb = t1 if last else t + h

        step_hits: list[EventHit] = []
        for i, spec in enumerate(events):
            gb = spec.g(tb, ynew)
            if _crossed(spec.direction, g_prev[i], gb):
                te = _locate_event(spec, t, tb, g_prev[i], gb, cont, tol_t)
                ye = _dense_eval(cont, (te - t) / (tb - t))
                step_hits.append(EventHit(index=i, t=te, y=ye, name=spec.name))
            g_prev[i] = gb
        step_hits.sort(key=lambda hgt: hgt.t)
        for hit in step_hits:
            hits.append(hit)
            if events[hit.index].terminal:
                terminal_hit = hit
                break

        if terminal_hit is not None:
            ts.append(terminal_hit.t)
            nodes.append(terminal_hit.y.copy())
            seg_end = tb
            break

        t = tb
        y = ynew
        k[0] = k[6]  # first-same-as-last
        ts.append(t)
        nodes.append(y.copy())

        if ctrl.fixed_step is None:
            factor = _MAX_FACTOR if errnorm == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * errnorm**-_ORDER_EXP)
            )
            h = min(h * factor, ctrl.hmax)

    seg_ts = np.array(ts[:-1] + [seg_end]) if terminal_hit is not None else None
    return Solution(
        ts=np.array(ts),
        nodes=np.array(nodes),
        conts=np.array(conts) if conts else np.empty((0, 5, dim)),
        events=hits,
        stats={"nfev": nfev, "naccept": naccept, "nreject": nreject},
        segment_times=seg_ts,
    )


def locate_events_on_mesh(
    sol: Solution,
    events: Sequence[EventSpec],
    tol_t: float,
) -> tuple[list[EventHit], EventHit | None]:
    """Event pass over a finished solution (used by compiled propagators).

    Returns all hits in time order plus the first terminal hit, if any;
    hits after a terminal one are dropped, matching the inline behavior.
    """
    seg_ts = sol._seg_ts
    hits: list[EventHit] = []
    g_prev = [e.g(float(seg_ts[0]), sol.nodes[0]) for e in events]
    for istep in range(len(sol.conts)):
        ta, tb = float(seg_ts[istep]), float(seg_ts[istep + 1])
        ynew = _dense_eval(sol.conts[istep], 1.0)
        step_hits: list[EventHit] = []
        for i, spec in enumerate(events):
            gb = spec.g(tb, ynew)
            if _crossed(spec.direction, g_prev[i], gb):
                te = _locate_event(spec, ta, tb, g_prev[i], gb, sol.conts[istep], tol_t)
                ye = _dense_eval(sol.conts[istep], (te - ta) / (tb - ta))
                step_hits.append(EventHit(index=i, t=te, y=ye, name=spec.name))
            g_prev[i] = gb
        step_hits.sort(key=lambda hgt: hgt.t)
        for hit in step_hits:
            hits.append(hit)
            if events[hit.index].terminal:
                return hits, hit
    return hits, None


class History:
    """Dense past of a delayed integration.

    Covers all t <= t0 through the pre-history function and [t0, frontier]
    through appended solution segments.  Queries beyond the frontier raise
    HistoryUnderrun: during a method-of-steps window that part of the
    solution is not final yet.
    """

    def __init__(self, prehistory: Callable[[float], np.ndarray], t0: float) -> None:
        self.prehistory = prehistory
        self.t0 = t0
        self.segments: list[Solution] = []
        self._seg_ends: list[float] = []  # lookup index, lazily synced

    @property
    def frontier(self) -> float:
        return self.segments[-1].t_end if self.segments else self.t0

    def last_state(self) -> np.ndarray:
        if self.segments:
            return self.segments[-1].y_end
        return np.asarray(self.prehistory(self.t0), dtype=float)

    def __call__(self, t: float) -> np.ndarray:
        if t <= self.t0:
            return np.asarray(self.prehistory(t), dtype=float)
        if t - self.frontier > 1e-12 * max(1.0, abs(self.frontier)):
            raise HistoryUnderrun(f"past state at t={t} beyond frontier {self.frontier}")
        ends = self._seg_ends
        if len(ends) != len(self.segments):
            ends.extend(s.t_end for s in self.segments[len(ends) :])
        i = bisect_left(ends, t)
        if i < len(self.segments):
            return self.segments[i](t)
        return self.segments[-1](self.frontier)


def integrate_delayed(
    history: History,
    rhs: Callable[[float, np.ndarray, Callable[[float], np.ndarray]], np.ndarray],
    ctrl: StepControl,
    t1: float,
    lag_floor: float,
) -> History:
    """Advance a delayed system to t1 by the method of steps.

    rhs(t, y, past) may call past(t') for any t' <= t - lag_floor.  The
    integration proceeds in windows shorter than lag_floor, so every lookup
    lands in history that is already final.  Returns the extended history.
    """
    if not lag_floor > 0.0:
        raise ValueError("lag_floor must be positive")
    t = history.frontier
    if t1 <= t:
        return history
    window = 0.9 * lag_floor
    y = history.last_state()
    while t < t1:
        tw = min(t + window, t1)
        capped = StepControl(
            rtol=ctrl.rtol,
            atol=ctrl.atol,
            h0=ctrl.h0,
            hmax=min(ctrl.hmax, window),
            max_steps=ctrl.max_steps,
            fixed_step=ctrl.fixed_step,
        )
        seg_rhs = lambda tt, yy: rhs(tt, yy, history)
        sol = integrate(OdeProblem(rhs=seg_rhs, y0=y, t0=t, t1=tw), capped)
        history.segments.append(sol)
        t = sol.t_end
        y = sol.y_end
    return history
