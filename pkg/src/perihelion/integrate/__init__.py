"""Integration package: generic adaptive stepper plus named hot kernels.

`integrate` / `integrate_delayed` run any Python right side.  `propagate`
runs one of the named kernels (rcn, newton, geodesic) and dispatches to the
compiled stepper in perihelion._fast when it is importable; setting
PERIHELION_PURE=1 in the environment forces the interpreted path.  Both
backends implement the same pair, controller, and interpolant; results
agree to tolerance-level differences and each backend is individually
deterministic.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from .pure import (
    EventHit,
    EventSpec,
    History,
    HistoryUnderrun,
    IntegrationError,
    MaxStepsExceeded,
    NonFiniteDerivative,
    OdeProblem,
    Solution,
    StepControl,
    StepSizeUnderflow,
    integrate,
    integrate_delayed,
    locate_events_on_mesh,
)
from . import kernels
from .kernels import KERNELS, make_rhs

__all__ = [
    "EventHit",
    "EventSpec",
    "History",
    "HistoryUnderrun",
    "IntegrationError",
    "MaxStepsExceeded",
    "NonFiniteDerivative",
    "OdeProblem",
    "Solution",
    "StepControl",
    "StepSizeUnderflow",
    "integrate",
    "integrate_delayed",
    "kernels",
    "propagate",
    "backend_name",
]

_FAST = None
if not os.environ.get("PERIHELION_PURE"):
    try:
        from perihelion import _fast as _FAST  # type: ignore[no-redef]
    except ImportError:
        _FAST = None

_KERNEL_IDS = {"rcn": 0, "newton": 1, "geodesic": 2}


def backend_name() -> str:
    return "compiled" if _FAST is not None else "pure"


def propagate(
    kernel: str,
    params: tuple[float, ...],
    y0: np.ndarray,
    t0: float,
    t1: float,
    ctrl: StepControl | None = None,
    events: Sequence[EventSpec] = (),
) -> Solution:
    """Integrate a named kernel over [t0, t1] on the active backend."""
    if kernel not in KERNELS:
        raise KeyError(f"unknown kernel {kernel!r}")
    if ctrl is None:
        ctrl = StepControl()
    if _FAST is None or ctrl.fixed_step is not None:
        rhs = make_rhs(kernel, params)
        return integrate(OdeProblem(rhs=rhs, y0=np.asarray(y0, float), t0=t0, t1=t1), ctrl, events)

    if not (t1 > t0):
        raise ValueError(f"need t1 > t0, got [{t0}, {t1}]")
    y0 = np.ascontiguousarray(y0, dtype=float)
    if y0.shape != (KERNELS[kernel],):
        raise ValueError(f"kernel {kernel!r} needs state of length {KERNELS[kernel]}")
    ts, nodes, conts, nfev, naccept, nreject = _FAST.propagate(
        _KERNEL_IDS[kernel],
        np.asarray(params, dtype=float),
        y0,
        t0,
        t1,
        ctrl.rtol,
        ctrl.atol,
        -1.0 if ctrl.h0 is None else ctrl.h0,
        ctrl.hmax,
        ctrl.max_steps,
    )
    sol = Solution(
        ts=ts,
        nodes=nodes,
        conts=conts,
        events=[],
        stats={"nfev": int(nfev), "naccept": int(naccept), "nreject": int(nreject)},
    )
    if events:
        hits, terminal = locate_events_on_mesh(sol, events, tol_t=1e-12 * (t1 - t0))
        sol.events = hits
        if terminal is not None:
            # truncate the mesh at the terminal hit, keeping its interpolant
            icut = int(np.searchsorted(ts, terminal.t, side="right") - 1)
            icut = min(max(icut, 0), len(conts) - 1)
            sol = Solution(
                ts=np.concatenate([ts[: icut + 1], [terminal.t]]),
                nodes=np.vstack([nodes[: icut + 1], terminal.y]),
                conts=conts[: icut + 1],
                events=hits,
                stats=sol.stats,
                segment_times=ts[: icut + 2],
            )
    return sol
