"""Observer-seen apparent advance of an inner planet's perihelion.

The pipeline chains the closed-form orbits of two planets into a common
3-D frame and measures how the apparent direction from the observer
(Earth by default) to the target (Mercury) rotates between two perihelion
passages of the target.

Conventions, all downstream of the closed-form orbit machinery:

  * The approximate time law omega t = xi + e (1 - omega^2 a^2/c^2)
    (1 - cos xi) links the phase parameter to coordinate time.  Perihelia
    of the target sit at xi = pi (2 l + 3/2), where the radius law
    a (1 + e sin xi) bottoms out at a (1 - e).
  * The frame is adapted to the observer: its orbit spans the x3 = 0
    plane.  The target plane is carried out of it by a proper rotation
    about the first axis through `inclination`; the value pi - theta
    (theta from the element table) yields the component form

        x = (r cos phi, -r cos theta sin phi, r sin theta sin phi).

    With inclination 0 the two orbits are coplanar with equal sense, and
    the apparent angle is invariant under a common shift of both
    perihelion azimuths; any other inclination breaks that symmetry.
  * Light-time handling: `exact` mode solves the reception time t3 from
    c (t3 - t1) = |x_target(t1) - x_observer(t3)|; `approx` mode freezes
    the observer at the emission time t1 (the observer moves at ~1e-4 c,
    so the apparent direction shifts by less than ~1e-4 rad).

The advance angle alpha between the two apparent directions is computed
twice: from the embedded vectors, and through a fully grouped scalar
expansion of the same dot product (`expanded_angle`).  The two must agree
to rounding; disagreement flags an assembly bug, not physics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rcn
from .ephemeris import EphemerisTable, PhysicalConstants, PlanetElements, load_default

__all__ = [
    "ObservationError",
    "EmbeddedOrbit",
    "PerihelionEpoch",
    "ReceptionState",
    "ObservedAdvanceConfig",
    "AdvanceReport",
    "embedded_pair",
    "mercury_epoch",
    "earth_xi_at",
    "earth_state_at_xi",
    "light_time_correct",
    "direction_angle",
    "expanded_angle",
    "advance_angle",
    "century_window_check",
]

LIGHT_TIME_MAX_ITER = 60


class ObservationError(ValueError):
    """Invalid observation-pipeline input or degenerate geometry."""


@dataclass(frozen=True)
class EmbeddedOrbit:
    """Planar closed-form orbit plus its plane's tilt in the common frame.

    inclination is the proper-rotation angle about the first axis that
    carries the x3 = 0 plane into the orbit plane; position() applies it
    to the polar coordinates of the planar solution.
    """

    orbit: rcn.RcnOrbit
    inclination: float = 0.0

    def rotation(self) -> np.ndarray:
        """3x3 rotation about the first axis (orthonormal, determinant 1)."""
        ci, si = math.cos(self.inclination), math.sin(self.inclination)
        return np.array([[1.0, 0.0, 0.0], [0.0, ci, -si], [0.0, si, ci]])

    def position(self, radius: float, angle: float) -> np.ndarray:
        ci, si = math.cos(self.inclination), math.sin(self.inclination)
        y = radius * math.sin(angle)
        return np.array([radius * math.cos(angle), ci * y, si * y])


def _planar(orbit: rcn.RcnOrbit | EmbeddedOrbit) -> rcn.RcnOrbit:
    return orbit.orbit if isinstance(orbit, EmbeddedOrbit) else orbit


def embedded_pair(
    target: PlanetElements,
    observer: PlanetElements,
    constants: PhysicalConstants,
    phi_target: float = 0.0,
    phi_observer: float = 0.0,
) -> tuple[EmbeddedOrbit, EmbeddedOrbit]:
    """Embed two planar orbits in the frame adapted to the observer.

    The observer spans x3 = 0; the target plane is rotated out of it by
    pi - theta about the first axis, reproducing the component form in
    the module docstring with the planes meeting at the table's theta.
    """
    t_orb = rcn.orbit_from_elements(target, constants, phi0=phi_target)
    o_orb = rcn.orbit_from_elements(observer, constants, phi0=phi_observer)
    return (
        EmbeddedOrbit(orbit=t_orb, inclination=math.pi - target.theta),
        EmbeddedOrbit(orbit=o_orb, inclination=0.0),
    )


@dataclass(frozen=True)
class PerihelionEpoch:
    """One perihelion passage of the target: phase, time, embedded position."""

    l: int
    xi: float              # pi (2 l + 3/2)
    time: float            # s, from the approximate time law
    radius: float          # a (1 - e), m
    angle: float           # azimuth in the orbit plane, rad, wound
    position: np.ndarray   # m, 3-vector in the common frame


def mercury_epoch(l: int, target: EmbeddedOrbit) -> PerihelionEpoch:
    """Target perihelion passage number l.

    The azimuth advances per turn by 2 pi (1 + sr/(2 (1 - e^2))) with
    sr = omega^2 a^2/c^2, the first-order winding form of 1/gamma; at
    sr = 0 the angle is phi0 + 2 pi l exactly.
    """
    if not isinstance(l, int):
        raise ObservationError(f"epoch index must be an integer, got {l!r}")
    o = target.orbit
    xi = math.pi * (2 * l + 1.5)
    t = rcn.time_of_xi(o, xi, mode="approx")
    radius = o.a * (1.0 - o.e)
    angle = o.phi0 + 2.0 * math.pi * l * (1.0 + 0.5 * o.speed_ratio_sq / (1.0 - o.e * o.e))
    return PerihelionEpoch(l=l, xi=xi, time=t, radius=radius, angle=angle,
                           position=target.position(radius, angle))


def earth_xi_at(t: float, observer: EmbeddedOrbit | rcn.RcnOrbit) -> float:
    """Observer phase parameter at coordinate time t (monotone inversion)."""
    return rcn.xi_of_time(_planar(observer), t, mode="approx")


def earth_state_at_xi(xi: float, observer: EmbeddedOrbit | rcn.RcnOrbit) -> tuple[float, float]:
    """(radius, azimuth) of the observer at phase xi.

    Radius is a (1 + e sin xi); the azimuth solves the orbit-cosine
    relation with the winding resolved monotonically, so it is continuous
    and increasing along the worldline (phase_of_xi carries the branch
    logic).  At e = 0 the azimuth rate degenerates to the phase rate:
    equal increments in xi give equal increments in the azimuth.
    """
    return rcn.phase_of_xi(_planar(observer), xi)


@dataclass(frozen=True)
class ReceptionState:
    """Observer state paired with one emission event of the target."""

    mode: str              # "approx" | "exact"
    t_emit: float          # s, target epoch time
    t_receive: float       # s; equals t_emit in approx mode
    xi: float              # observer phase at t_receive
    radius: float          # m
    angle: float           # rad, wound
    position: np.ndarray   # m, 3-vector in the common frame
    separation: float      # |target - observer| at the used times, m
    residual_m: float      # |c (t3 - t1) - separation|; nan in approx mode


def light_time_correct(
    epoch: PerihelionEpoch,
    observer: EmbeddedOrbit,
    mode: str = "approx",
) -> ReceptionState:
    """Observer state when light emitted at the epoch arrives.

    exact mode iterates t3 = t1 + |x1 - x3(t3)|/c; the map contracts at
    the observer speed over c (~1e-4 here), so a handful of sweeps lands
    on the floating-point floor.  approx mode freezes the observer at t1.
    """
    if mode not in ("approx", "exact"):
        raise ObservationError(f"unknown light-time mode {mode!r}")
    o = observer.orbit
    t1 = epoch.time

    def state_at(t: float) -> tuple[float, float, float, np.ndarray]:
        xi = rcn.xi_of_time(o, t, mode="approx")
        r, phi = rcn.phase_of_xi(o, xi)
        return xi, r, phi, observer.position(r, phi)

    if mode == "approx":
        xi, r, phi, pos = state_at(t1)
        sep = float(np.linalg.norm(epoch.position - pos))
        return ReceptionState(mode=mode, t_emit=t1, t_receive=t1, xi=xi,
                              radius=r, angle=phi, position=pos,
                              separation=sep, residual_m=float("nan"))

    tau = 0.0
    for _ in range(LIGHT_TIME_MAX_ITER):
        _, _, _, pos = state_at(t1 + tau)
        tau_new = float(np.linalg.norm(epoch.position - pos)) / o.c
        done = abs(tau_new - tau) <= 4.0 * math.ulp(max(tau_new, 1.0))
        tau = tau_new
        if done:
            break
    else:
        raise ObservationError("light-time iteration did not converge")
    xi, r, phi, pos = state_at(t1 + tau)
    sep = float(np.linalg.norm(epoch.position - pos))
    return ReceptionState(mode=mode, t_emit=t1, t_receive=t1 + tau, xi=xi,
                          radius=r, angle=phi, position=pos, separation=sep,
                          residual_m=abs(o.c * tau - sep))


def direction_angle(d1: np.ndarray, d2: np.ndarray) -> float:
    """Angle in [0, pi] between two direction vectors."""
    n1 = float(np.linalg.norm(d1))
    n2 = float(np.linalg.norm(d2))
    if n1 == 0.0 or n2 == 0.0:
        raise ObservationError("degenerate zero-length direction vector")
    q = float(np.dot(d1, d2)) / (n1 * n2)
    return math.acos(min(1.0, max(-1.0, q)))


def expanded_angle(
    target_a: tuple[float, float],
    target_b: tuple[float, float],
    observer_a: tuple[float, float],
    observer_b: tuple[float, float],
    inclination: float,
) -> float:
    """Grouped scalar expansion of the apparent-angle cosine.

    Same algebra as the vector path, written out in the (radius, azimuth)
    pairs: with cy = cos(inclination) and cz = sin(inclination) the
    target's second and third components carry cy and cz, the observer
    stays in the x3 = 0 plane, and each bracket below is one component of
    a difference vector.  Serves as an assembly cross-check for
    advance_angle; the coefficients come from the rotation, never from
    numeric constants.
    """
    r1a, p1a = target_a
    r1b, p1b = target_b
    r3a, p3a = observer_a
    r3b, p3b = observer_b
    cy, cz = math.cos(inclination), math.sin(inclination)
    xa = r1a * math.cos(p1a) - r3a * math.cos(p3a)
    xb = r1b * math.cos(p1b) - r3b * math.cos(p3b)
    ya = cy * r1a * math.sin(p1a) - r3a * math.sin(p3a)
    yb = cy * r1b * math.sin(p1b) - r3b * math.sin(p3b)
    za = cz * r1a * math.sin(p1a)
    zb = cz * r1b * math.sin(p1b)
    num = xa * xb + ya * yb + za * zb
    na = math.sqrt(xa * xa + ya * ya + za * za)
    nb = math.sqrt(xb * xb + yb * yb + zb * zb)
    if na == 0.0 or nb == 0.0:
        raise ObservationError("degenerate zero-length direction vector")
    return math.acos(min(1.0, max(-1.0, num / (na * nb))))


@dataclass(frozen=True)
class ObservedAdvanceConfig:
    """Perihelion azimuths, epoch pair, and light-time mode for one run."""

    phi1_0: float = 0.0    # target perihelion azimuth, rad
    phi3_0: float = 0.0    # observer perihelion azimuth, rad
    l1: int = 0
    l2: int = 415
    mode: str = "approx"

    def __post_init__(self) -> None:
        if self.mode not in ("approx", "exact"):
            raise ObservationError(f"unknown light-time mode {self.mode!r}")
        if not (isinstance(self.l1, int) and isinstance(self.l2, int)):
            raise ObservationError("epoch indices must be integers")
        if self.l2 <= self.l1:
            raise ObservationError(f"need l2 > l1, got l1={self.l1}, l2={self.l2}")
        if not (math.isfinite(self.phi1_0) and math.isfinite(self.phi3_0)):
            raise ObservationError("perihelion azimuths must be finite")


@dataclass(frozen=True)
class AdvanceReport:
    """Apparent advance angle between two target perihelion epochs.

    alpha_rad comes from the embedded difference vectors;
    alpha_expanded_rad re-derives it through the grouped scalar expansion.
    The per-century figures rescale alpha to exactly 100 observer periods
    and are reported alongside, never folded into alpha itself.
    """

    l1: int
    l2: int
    mode: str
    phi1_0: float
    phi3_0: float
    epochs: tuple[PerihelionEpoch, PerihelionEpoch]
    receptions: tuple[ReceptionState, ReceptionState]
    alpha_rad: float
    alpha_expanded_rad: float
    epoch_span_s: float
    century_s: float       # 100 observer periods
    window_ok: bool

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha_rad <= math.pi):
            raise ObservationError(f"advance angle {self.alpha_rad} outside [0, pi]")

    @property
    def alpha_deg(self) -> float:
        return math.degrees(self.alpha_rad)

    @property
    def alpha_arcsec(self) -> float:
        return 3600.0 * self.alpha_deg

    @property
    def per_century_factor(self) -> float:
        return self.century_s / self.epoch_span_s

    @property
    def alpha_per_century_deg(self) -> float:
        return self.alpha_deg * self.per_century_factor

    def as_dict(self) -> dict:
        """JSON-ready mapping; nan residuals become null."""
        def num(x: float) -> float | None:
            return None if math.isnan(x) else float(x)

        return {
            "l1": self.l1,
            "l2": self.l2,
            "mode": self.mode,
            "phi1_0_rad": self.phi1_0,
            "phi3_0_rad": self.phi3_0,
            "alpha_rad": self.alpha_rad,
            "alpha_deg": self.alpha_deg,
            "alpha_arcsec": self.alpha_arcsec,
            "alpha_expanded_rad": self.alpha_expanded_rad,
            "alpha_per_century_deg": self.alpha_per_century_deg,
            "per_century_factor": self.per_century_factor,
            "epoch_span_s": self.epoch_span_s,
            "century_s": self.century_s,
            "window_ok": self.window_ok,
            "epochs": [
                {
                    "l": ep.l,
                    "xi_rad": ep.xi,
                    "time_s": ep.time,
                    "radius_m": ep.radius,
                    "angle_rad": ep.angle,
                    "position_m": [float(v) for v in ep.position],
                }
                for ep in self.epochs
            ],
            "receptions": [
                {
                    "t_emit_s": rs.t_emit,
                    "t_receive_s": rs.t_receive,
                    "xi_rad": rs.xi,
                    "radius_m": rs.radius,
                    "angle_rad": rs.angle,
                    "position_m": [float(v) for v in rs.position],
                    "separation_m": rs.separation,
                    "light_time_residual_m": num(rs.residual_m),
                }
                for rs in self.receptions
            ],
        }


def advance_angle(
    cfg: ObservedAdvanceConfig,
    table: EphemerisTable | None = None,
    target_key: int | str = "mercury",
    observer_key: int | str = "earth",
) -> AdvanceReport:
    """Run the full pipeline for the epoch pair (cfg.l1, cfg.l2)."""
    if table is None:
        table = load_default()
    tgt, obs = embedded_pair(table.body(target_key), table.body(observer_key),
                             table.constants, cfg.phi1_0, cfg.phi3_0)
    epochs = tuple(mercury_epoch(l, tgt) for l in (cfg.l1, cfg.l2))
    recs = tuple(light_time_correct(ep, obs, cfg.mode) for ep in epochs)
    d1, d2 = (ep.position - rs.position for ep, rs in zip(epochs, recs))
    alpha = direction_angle(d1, d2)
    alpha_exp = expanded_angle(
        (epochs[0].radius, epochs[0].angle), (epochs[1].radius, epochs[1].angle),
        (recs[0].radius, recs[0].angle), (recs[1].radius, recs[1].angle),
        tgt.inclination)
    return AdvanceReport(
        l1=cfg.l1, l2=cfg.l2, mode=cfg.mode,
        phi1_0=cfg.phi1_0, phi3_0=cfg.phi3_0,
        epochs=epochs, receptions=recs,
        alpha_rad=alpha, alpha_expanded_rad=alpha_exp,
        epoch_span_s=epochs[1].time - epochs[0].time,
        century_s=100.0 * obs.orbit.period,
        window_ok=century_window_check(cfg.l1, cfg.l2, tgt.orbit, obs.orbit),
    )


def century_window_check(
    l1: int,
    l2: int,
    target: rcn.RcnOrbit | EmbeddedOrbit,
    observer: rcn.RcnOrbit | EmbeddedOrbit,
) -> bool:
    """True when 100 observer periods fit the window [span, span + T_target].

    span is the time between target perihelion epochs l1 and l2; with the
    default elements the chain of inequalities holds for l2 - l1 = 415 and
    for no neighboring spacing.
    """
    t_orb = _planar(target)
    o_orb = _planar(observer)
    span = (rcn.time_of_xi(t_orb, math.pi * (2 * l2 + 1.5), mode="approx")
            - rcn.time_of_xi(t_orb, math.pi * (2 * l1 + 1.5), mode="approx"))
    century = 100.0 * o_orb.period
    return span <= century <= span + t_orb.period
