#!/usr/bin/env python3
"""Time the named integration kernels on both backends.

The compiled stepper in perihelion._fast and the interpreted one in
perihelion.integrate.pure implement the same embedded pair, controller,
and interpolant; PERIHELION_PURE=1 forces the interpreted path.  The
backend is chosen at import time, so this script re-executes itself once
per backend (--inner) and prints the comparison.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import subprocess
import sys
import time


def _workloads():
    import numpy as np

    from perihelion import gr, rcn
    from perihelion.ephemeris import load_default
    from perihelion.integrate import StepControl, propagate

    table = load_default()
    mercury = table.body("mercury")
    ctrl = StepControl(rtol=1e-12, atol=1e-13)

    o = rcn.orbit_from_elements(mercury, table.constants)
    s0 = rcn.state_at_time(o, 0.0)
    v0 = np.asarray(s0.v)
    gam0 = 1.0 / math.sqrt(1.0 - float(v0 @ v0) / o.c**2)
    y_rcn = np.concatenate([np.asarray(s0.x) / o.a,
                            gam0 * v0 / (o.a * o.omega)])
    p_rcn = (o.mu / (o.a**3 * o.omega**2), o.c / (o.a * o.omega))

    op = gr.proper_kepler_solve(-0.5, math.sqrt(1.0 - mercury.e**2), 1.0)
    rp = op.a * (1.0 - op.e)
    y_newton = np.array([rp, 0.0, 0.0, 0.0, op.ang_mom_mag / rp, 0.0])

    mu = rcn.third_kepler(mercury, table.constants, variant="elliptic")
    c_s = table.constants.c / (mercury.a * math.sqrt(mu / mercury.a**3))
    metric = gr.make_metric(1.0, c_s)
    rate = gr.coordinate_time_rate(op, metric, rp)
    y_geo = np.array([0.0, rp, 0.0, 0.0, c_s * rate, 0.0,
                      op.ang_mom_mag / rp, 0.0])

    two_pi = 2.0 * math.pi
    return propagate, ctrl, [
        ("rcn", p_rcn, y_rcn, 50.0 * two_pi),
        ("newton", (1.0,), y_newton, 50.0 * op.period_tau),
        ("geodesic", (1.0, c_s), y_geo, 10.0 * op.period_tau),
    ]


def run_inner() -> None:
    from perihelion.integrate import backend_name

    propagate, ctrl, loads = _workloads()
    out = {"backend": backend_name(), "kernels": {}}
    for name, params, y0, t_end in loads:
        best = math.inf
        naccept = 0
        for _ in range(3):
            t0 = time.perf_counter()
            sol = propagate(name, params, y0, 0.0, t_end, ctrl)
            best = min(best, time.perf_counter() - t0)
            naccept = sol.stats["naccept"]
        out["kernels"][name] = {"seconds": best, "steps": naccept}
    print(json.dumps(out))


def run_outer() -> None:
    results = {}
    for label, extra in (("compiled", {}), ("pure", {"PERIHELION_PURE": "1"})):
        env = dict(os.environ)
        env.pop("PERIHELION_PURE", None)
        env.update(extra)
        proc = subprocess.run([sys.executable, __file__, "--inner"],
                              capture_output=True, text=True, env=env)
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            raise SystemExit(proc.returncode)
        results[label] = json.loads(proc.stdout.strip().splitlines()[-1])

    if results["compiled"]["backend"] != "compiled":
        print("note: compiled backend unavailable; both rows are interpreted")
    print(f"{'kernel':<10} {'steps':>7} {'compiled s':>11} {'pure s':>9} {'speedup':>8}")
    for name in results["compiled"]["kernels"]:
        fast = results["compiled"]["kernels"][name]
        slow = results["pure"]["kernels"][name]
        ratio = slow["seconds"] / fast["seconds"]
        print(f"{name:<10} {fast['steps']:>7} {fast['seconds']:>11.4f} "
              f"{slow['seconds']:>9.4f} {ratio:>7.1f}x")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--inner", action="store_true")
    args = parser.parse_args()
    run_inner() if args.inner else run_outer()
