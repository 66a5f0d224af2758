"""Command-line front end: precession, orbit, observe, validate.

Every run writes a manifest naming its output files next to them;
identical flags produce byte-identical data files.  Exit codes: 0 ok,
1 check failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__, gr, rcn
from .checks import run_checks
from .ephemeris import (
    EphemerisError,
    EphemerisTable,
    PlanetElements,
    load_default,
    load_file,
    scale_speed_of_light,
)
from .integrate import StepControl, propagate
from .observation import ObservationError, ObservedAdvanceConfig, advance_angle
from .reportio import RunManifest, write_csv, write_json, write_manifest

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_USAGE = 2

TRAJECTORY_HEADER = (
    "t_s", "x_m", "y_m", "z_m",
    "vx_m_per_s", "vy_m_per_s", "vz_m_per_s", "r_m", "phi_rad",
)


class CliError(Exception):
    """Configuration problem surfaced to the user; maps to exit code 2."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perihelion",
        description="Planetary orbit models and the observed perihelion-advance pipeline.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ephemeris", metavar="PATH", default=None,
                        help="element table (TOML); default $PERIHELION_EPHEMERIS "
                             "or the builtin table")
    common.add_argument("--c-scale", type=float, default=1.0, metavar="F",
                        help="multiply the speed of light by F everywhere")
    common.add_argument("--out", metavar="DIR", default=".",
                        help="directory for output files and the run manifest")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("precession", parents=[common],
                       help="perihelion advance of one planet under either model")
    p.add_argument("planet")
    p.add_argument("--model", choices=("rcn", "gr"), default="rcn")

    p = sub.add_parser("orbit", parents=[common],
                       help="trajectory CSV from one orbit model")
    p.add_argument("planet")
    p.add_argument("--model", choices=("rcn", "gr-geodesic", "proper-kepler"),
                   default="rcn")
    p.add_argument("--integrated", action="store_true",
                   help="integrate the momentum-law equation instead of "
                        "evaluating the closed form (rcn only)")
    p.add_argument("--periods", type=float, default=1.0,
                   help="time span in orbital periods of the planet")
    p.add_argument("--samples", type=int, default=512,
                   help="number of output rows")
    p.add_argument("--output", metavar="NAME", default=None,
                   help="CSV file name (default orbit_<planet>_<model>.csv)")

    p = sub.add_parser("observe", parents=[common],
                       help="Earth-observed Mercury perihelion advance angle")
    p.add_argument("--l1", type=int, default=0)
    p.add_argument("--l2", type=int, default=415)
    p.add_argument("--phi1-0", dest="phi1_0", type=float, default=0.0,
                   metavar="RAD", help="Mercury perihelion azimuth")
    p.add_argument("--phi3-0", dest="phi3_0", type=float, default=0.0,
                   metavar="RAD", help="Earth perihelion azimuth")
    p.add_argument("--mode", choices=("approx", "exact"), default="approx",
                   help="light-time handling")
    p.add_argument("--sweep", type=int, default=0, metavar="N",
                   help="run an N x N grid over both perihelion azimuths and "
                        "write a CSV instead of a single report")

    p = sub.add_parser("validate", parents=[common],
                       help="run the named acceptance checks")
    p.add_argument("--quick", action="store_true",
                   help="closed-form subset only")
    return parser


def _resolve_table(args: argparse.Namespace) -> tuple[EphemerisTable, str]:
    path = args.ephemeris
    if path is None:
        path = os.environ.get("PERIHELION_EPHEMERIS") or None
    try:
        table = load_file(path) if path else load_default()
    except OSError as exc:
        raise CliError(f"cannot read ephemeris: {exc}") from None
    except EphemerisError as exc:
        raise CliError(str(exc)) from None
    if args.c_scale != 1.0:
        if not (args.c_scale > 0.0 and math.isfinite(args.c_scale)):
            raise CliError(f"--c-scale must be positive and finite, got {args.c_scale}")
        table = scale_speed_of_light(table, args.c_scale)
    return table, path or "builtin"


def _planet(table: EphemerisTable, name: str) -> PlanetElements:
    try:
        p = table.body(name)
    except KeyError:
        known = ", ".join(b.name for b in table.planets())
        raise CliError(f"unknown planet {name!r}; table has: {known}") from None
    if p.name == "sun":
        raise CliError("the sun has no orbit here; pick a planet")
    return p


# ---------------------------------------------------------------------------
# trajectory assembly

def _rows_rcn_closed(o: rcn.RcnOrbit, times: np.ndarray) -> list[tuple]:
    rows = []
    for t in times:
        s = rcn.state_at_time(o, float(t))
        r, phi = rcn.phase_of_xi(o, rcn.xi_of_time(o, float(t), mode="exact"))
        rows.append((float(t), s.x[0], s.x[1], s.x[2],
                     s.v[0], s.v[1], s.v[2], r, phi))
    return rows


def _rows_rcn_integrated(o: rcn.RcnOrbit, times: np.ndarray) -> list[tuple]:
    a, omega, c = o.a, o.omega, o.c
    s0 = rcn.state_at_time(o, 0.0)
    v0 = np.asarray(s0.v)
    gam0 = 1.0 / math.sqrt(1.0 - float(v0 @ v0) / c**2)
    y0 = np.concatenate([np.asarray(s0.x) / a, gam0 * v0 / (a * omega)])
    mu_s = o.mu / (a**3 * omega**2)
    c_s = c / (a * omega)
    sol = propagate("rcn", (mu_s, c_s), y0, 0.0, float(times[-1]) * omega,
                    ctrl=StepControl(rtol=1e-12, atol=1e-13))
    samples = [sol(float(t) * omega) for t in times]
    phis = np.unwrap([math.atan2(y[1], y[0]) for y in samples])
    rows = []
    for t, y, phi in zip(times, samples, phis):
        x = y[:3] * a
        u = y[3:] * a * omega
        v = u / math.sqrt(1.0 + float(u @ u) / c**2)
        rows.append((float(t), x[0], x[1], x[2], v[0], v[1], v[2],
                     float(np.linalg.norm(x)), float(phi)))
    return rows


def _rows_geodesic(p: PlanetElements, table: EphemerisTable,
                   periods: float, samples: int) -> list[tuple]:
    # integrate in units a = 1, Kepler mean motion = 1, over proper time
    mu = rcn.third_kepler(p, table.constants, variant="elliptic")
    n = math.sqrt(mu / p.a**3)
    c_s = table.constants.c / (p.a * n)
    op = gr.proper_kepler_solve(-0.5, math.sqrt(1.0 - p.e**2), 1.0)
    metric = gr.make_metric(1.0, c_s)
    rp = op.a * (1.0 - op.e)
    rate = gr.coordinate_time_rate(op, metric, rp)
    y0 = np.array([0.0, rp, 0.0, 0.0, c_s * rate, 0.0, op.ang_mom_mag / rp, 0.0])
    tau_end = periods * op.period_tau
    sol = propagate("geodesic", (1.0, c_s), y0, 0.0, tau_end,
                    ctrl=StepControl(rtol=1e-12, atol=1e-13))
    ys = [sol(tau) for tau in np.linspace(0.0, tau_end, samples)]
    phis = np.unwrap([math.atan2(y[2], y[1]) for y in ys])
    rows = []
    for y, phi in zip(ys, phis):
        t = (y[0] / c_s) / n
        x = y[1:4] * p.a
        v = y[5:8] / (y[4] / c_s) * p.a * n
        rows.append((float(t), x[0], x[1], x[2], v[0], v[1], v[2],
                     float(np.linalg.norm(x)), float(phi)))
    return rows


def _rows_proper_kepler(p: PlanetElements, table: EphemerisTable,
                        periods: float, samples: int) -> list[tuple]:
    op = gr.proper_kepler_from_elements(p, table.constants)
    metric = gr.make_metric(op.mu, table.constants.c)
    rows = []
    for tau in np.linspace(0.0, periods * op.period_tau, samples):
        tau = float(tau)
        psi = gr.anomaly_of_tau(op, tau)
        r, phi = gr.phase_of_tau(op, tau)
        t = gr.t_of_tau(op, metric, tau)
        dpsi = op.mean_motion / (1.0 - op.e * math.cos(psi))
        drdtau = op.a * op.e * math.sin(psi) * dpsi
        dphidtau = op.ang_mom_mag / r**2
        dtdtau = gr.coordinate_time_rate(op, metric, r)
        cp, sp = math.cos(phi), math.sin(phi)
        vx = (drdtau * cp - r * dphidtau * sp) / dtdtau
        vy = (drdtau * sp + r * dphidtau * cp) / dtdtau
        rows.append((t, r * cp, r * sp, 0.0, vx, vy, 0.0, r, phi))
    return rows


# ---------------------------------------------------------------------------
# subcommands; each returns (exit code, output file names, config dict)

def cmd_precession(args: argparse.Namespace, table: EphemerisTable,
                   out_dir: Path) -> tuple[int, list[str], dict[str, Any]]:
    p = _planet(table, args.planet)
    earth = table.body("earth")
    if args.model == "rcn":
        s = rcn.advance_per_century_sun(p, table.constants, earth=earth)
    else:
        s = gr.gr_precession(p, table.constants, earth=earth)
    print(f"body                {s.body}")
    print(f"model               {s.model}")
    print(f"gamma               {s.gamma:.15f}")
    print(f"one_minus_gamma     {s.one_minus_gamma:.6e}")
    print(f"arcsec_per_period   {s.arcsec_per_period:.6f}")
    print(f"periods_per_century {s.n_periods}")
    print(f"arcsec_per_century  {s.arcsec_per_century:.4f}")
    name = f"precession_{p.name}_{args.model}.json"
    write_json(out_dir / name, {
        "body": s.body,
        "model": s.model,
        "gamma": s.gamma,
        "one_minus_gamma": s.one_minus_gamma,
        "arcsec_per_period": s.arcsec_per_period,
        "periods_per_century": s.n_periods,
        "arcsec_per_century": s.arcsec_per_century,
    })
    config = {"planet": args.planet, "model": args.model}
    return EXIT_OK, [name], config


def cmd_orbit(args: argparse.Namespace, table: EphemerisTable,
              out_dir: Path) -> tuple[int, list[str], dict[str, Any]]:
    p = _planet(table, args.planet)
    if not (args.periods > 0.0 and math.isfinite(args.periods)):
        raise CliError(f"--periods must be positive, got {args.periods}")
    if args.samples < 2:
        raise CliError(f"--samples must be at least 2, got {args.samples}")
    if args.integrated and args.model != "rcn":
        raise CliError("--integrated applies to the rcn model only")

    if args.model == "rcn":
        o = rcn.orbit_from_elements(p, table.constants)
        times = np.linspace(0.0, args.periods * o.period, args.samples)
        rows = (_rows_rcn_integrated if args.integrated
                else _rows_rcn_closed)(o, times)
    elif args.model == "gr-geodesic":
        rows = _rows_geodesic(p, table, args.periods, args.samples)
    else:
        rows = _rows_proper_kepler(p, table, args.periods, args.samples)

    suffix = "_integrated" if args.integrated else ""
    name = args.output or f"orbit_{p.name}_{args.model}{suffix}.csv"
    write_csv(out_dir / name, TRAJECTORY_HEADER, rows)
    print(f"wrote {name}: {len(rows)} samples, {args.periods} period(s) "
          f"of {p.name} under {args.model}{suffix.replace('_', ' ')}")
    config = {"planet": args.planet, "model": args.model,
              "integrated": args.integrated, "periods": args.periods,
              "samples": args.samples, "output": name}
    return EXIT_OK, [name], config


def cmd_observe(args: argparse.Namespace, table: EphemerisTable,
                out_dir: Path) -> tuple[int, list[str], dict[str, Any]]:
    config: dict[str, Any] = {
        "l1": args.l1, "l2": args.l2, "phi1_0_rad": args.phi1_0,
        "phi3_0_rad": args.phi3_0, "mode": args.mode, "sweep": args.sweep,
    }
    if args.sweep:
        if args.sweep < 2:
            raise CliError(f"--sweep needs a grid of at least 2, got {args.sweep}")
        shifts = np.linspace(0.0, 2.0 * math.pi, args.sweep, endpoint=False)
        rows = []
        try:
            for p1 in shifts:
                for p3 in shifts:
                    cfg = ObservedAdvanceConfig(
                        phi1_0=float(p1), phi3_0=float(p3),
                        l1=args.l1, l2=args.l2, mode=args.mode)
                    rows.append((float(p1), float(p3),
                                 advance_angle(cfg, table=table).alpha_deg))
        except ObservationError as exc:
            raise CliError(str(exc)) from None
        name = "advance_sweep.csv"
        write_csv(out_dir / name, ("phi1_0_rad", "phi3_0_rad", "alpha_deg"), rows)
        alphas = [r[2] for r in rows]
        print(f"wrote {name}: {len(rows)} configurations, alpha "
              f"{min(alphas):.3f}..{max(alphas):.3f} deg")
        return EXIT_OK, [name], config

    try:
        cfg = ObservedAdvanceConfig(phi1_0=args.phi1_0, phi3_0=args.phi3_0,
                                    l1=args.l1, l2=args.l2, mode=args.mode)
        rep = advance_angle(cfg, table=table)
    except ObservationError as exc:
        raise CliError(str(exc)) from None
    name = "advance_report.json"
    write_json(out_dir / name, rep.as_dict())
    print(f"epochs              l = {rep.l1}, {rep.l2}")
    print(f"light-time mode     {rep.mode}")
    print(f"alpha               {rep.alpha_deg:.3f} deg  ({rep.alpha_arcsec:.3f} arcsec)")
    print(f"alpha_expanded      {math.degrees(rep.alpha_expanded_rad):.3f} deg")
    print(f"per-century factor  {rep.per_century_factor:.9f} (reported, not applied)")
    print(f"alpha_per_century   {rep.alpha_per_century_deg:.3f} deg")
    print(f"century window ok   {rep.window_ok}")
    return EXIT_OK, [name], config


def cmd_validate(args: argparse.Namespace, table: EphemerisTable,
                 out_dir: Path) -> tuple[int, list[str], dict[str, Any]]:
    results = run_checks(table, quick=args.quick)
    for r in results:
        print(r.line())
    n_pass = sum(r.passed for r in results)
    n_fail = len(results) - n_pass
    print(f"\n{len(results)} checks: {n_pass} passed, {n_fail} failed")
    name = "validate_report.json"
    write_json(out_dir / name, {
        "quick": args.quick,
        "passed": n_fail == 0,
        "checks": [{
            "name": r.name, "measured": r.measured, "expected": r.expected,
            "tol": r.tol, "kind": r.kind, "passed": r.passed,
        } for r in results],
    })
    config = {"quick": args.quick}
    return (EXIT_OK if n_fail == 0 else EXIT_CHECK_FAILURE), [name], config


_HANDLERS = {
    "precession": cmd_precession,
    "orbit": cmd_orbit,
    "observe": cmd_observe,
    "validate": cmd_validate,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        table, source = _resolve_table(args)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        code, outputs, config = _HANDLERS[args.command](args, table, out_dir)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    config["ephemeris"] = source
    config["c_scale"] = args.c_scale
    config["out"] = args.out
    manifest = RunManifest(
        command=args.command,
        config=config,
        tool_version=__version__,
        outputs=tuple(outputs),
        wall_clock_s=time.perf_counter() - started,
    )
    write_manifest(out_dir, manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())
