"""Closed-form orbit of the relativistic momentum law around a resting sun.

The equation of motion is d/dt[(1-|v|^2/c^2)^(-1/2) v] = -m10G x/|x|^3.  Its
bound solutions are precessing ellipses: in polar form

    a (1 - e^2) / r = 1 + e cos(gamma (phi - phi0)),

with gamma = sqrt(1 - (m10G)^2 / (c^2 |M|^2)) slightly below one, so the
perihelion advances by 2 pi (1/gamma - 1) per radial period.  Time enters
through the phase parameter xi:

    r = a (1 + e sin xi),   omega t = xi - xi0 - (e E^2/c^4) cos xi,

and the whole worldline is recovered algebraically from (E, M).

Angular-momentum convention: the conserved vector is stored as the single
cross product M = (1-|v|^2/c^2)^(-1/2) (x cross v).  A literal reading of
the defining antisymmetrized sum doubles this; only the ratio
(m10G)^2/(c^2|M|^2) reaches any observable, and the single-cross-product
convention is the one that reproduces 1 - gamma = 1.3341e-8 for Mercury
from the default elements.  Documented here once; everything downstream
relies on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ephemeris import PhysicalConstants, PlanetElements, angular_frequency, period
from .rootfind import newton_bracketed

__all__ = [
    "OrbitDomainError",
    "ConservedQuantities",
    "WorldlineSample",
    "RcnOrbit",
    "RcnAcceleration",
    "AdvanceSummary",
    "conserved_from_state",
    "orbit_from_conserved",
    "orbit_from_elements",
    "radius_at_angle",
    "time_of_xi",
    "radius_of_xi",
    "xi_of_time",
    "phase_of_xi",
    "state_at_time",
    "third_kepler",
    "rcn_rhs",
    "advance_per_century_sun",
]


class OrbitDomainError(ValueError):
    """Inputs outside the bound-orbit domain (inadmissible constants etc.)."""


@dataclass(frozen=True)
class ConservedQuantities:
    """Energy and angular momentum per unit planet mass.

    energy includes the rest term: E = c^2 (1-|v|^2/c^2)^(-1/2) - m10G/r,
    so bound orbits have 0 < E < c^2.

    For weak fields all orbit information lives in the tiny difference
    c^2 - E (~1e-8 of E), which a bare energy float carries to only ~1e-8
    relative.  energy_defect stores that difference at full precision when
    the producer can compute it stably; reconstruction uses it if present.
    """

    energy: float                       # m^2/s^2
    ang_mom: np.ndarray                 # m^2/s, 3-vector
    energy_defect: float | None = None  # c^2 - E, m^2/s^2

    @property
    def ang_mom_mag(self) -> float:
        return float(np.linalg.norm(self.ang_mom))

    def half_defect(self, c: float) -> float:
        """c^2 - E, from the sharp companion field when available."""
        if self.energy_defect is not None:
            return self.energy_defect
        return c * c - self.energy

    def admissibility_failures(self, mu: float, c: float) -> list[str]:
        """Which of the bound-orbit inequalities fail, by name.

        The real-eccentricity combination gets a small noise floor: a
        circular orbit sits exactly on that boundary, and rounding in E
        must not tip it over.
        """
        c4 = c**4
        cm2 = c * c * self.ang_mom_mag**2
        defect = self.half_defect(c) * (c * c + self.energy)  # c^4 - E^2
        out = []
        if not defect > 0.0:
            out.append("E^2 < c^4 (bound energy)")
        if not cm2 > mu * mu:
            out.append("c^2|M|^2 > (m10G)^2 (angular momentum above capture)")
        if mu * mu * c4 - cm2 * defect < -4e-11 * mu * mu * c4:
            out.append("c^2|M|^2(E^2-c^4) + (m10G)^2 c^4 > 0 (real eccentricity)")
        if not self.energy > 0.0:
            out.append("E > 0")
        return out


@dataclass(frozen=True)
class WorldlineSample:
    t: float               # s
    x: np.ndarray          # m, 3-vector
    v: np.ndarray          # m/s, 3-vector


@dataclass(frozen=True)
class RcnOrbit:
    """Closed-form orbit descriptor; all fields SI."""

    a: float               # major semi-axis, m
    e: float               # eccentricity
    gamma: float           # precession coefficient, 0 < gamma <= 1
    phi0: float            # perihelion angle, rad
    xi0: float             # time-phase parameter, rad
    omega: float           # mean angular frequency, rad/s
    energy: float          # generating constant E, m^2/s^2
    ang_mom_mag: float     # generating constant |M|, m^2/s
    mu: float              # m10G, m^3/s^2
    c: float               # speed of light, m/s

    def __post_init__(self) -> None:
        if not (0.0 <= self.e < 1.0):
            raise OrbitDomainError(f"eccentricity {self.e} outside [0, 1)")
        if not (0.0 < self.gamma <= 1.0):
            raise OrbitDomainError(f"gamma {self.gamma} outside (0, 1]")
        if not (self.a > 0.0 and self.omega > 0.0):
            raise OrbitDomainError("need a > 0 and omega > 0")

    @property
    def one_minus_gamma(self) -> float:
        # computed without the 1 - sqrt(1-s) cancellation
        s = self.mu**2 / (self.c**2 * self.ang_mom_mag**2)
        return s / (1.0 + self.gamma)

    @property
    def kappa(self) -> float:
        """Coefficient e E^2/c^4 of the exact time equation."""
        return self.e * self.energy**2 / self.c**4

    @property
    def speed_ratio_sq(self) -> float:
        return (self.omega * self.a / self.c) ** 2

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


def _gamma_of(mu: float, c: float, m_mag: float) -> float:
    s = mu * mu / (c * c * m_mag * m_mag)
    if not s < 1.0:
        raise OrbitDomainError("c^2|M|^2 > (m10G)^2 (angular momentum above capture)")
    return math.sqrt(1.0 - s)


def conserved_from_state(s: WorldlineSample, mu: float, c: float) -> ConservedQuantities:
    """E and M of a state; the relativistic analogue of vis-viva + areal law."""
    x = np.asarray(s.x, float)
    v = np.asarray(s.v, float)
    r = float(np.linalg.norm(x))
    if r <= 0.0:
        raise OrbitDomainError("zero radius")
    beta2 = float(v @ v) / (c * c)
    if beta2 >= 1.0:
        raise OrbitDomainError(f"superluminal state |v|^2/c^2 = {beta2}")
    lorentz = 1.0 / math.sqrt(1.0 - beta2)
    energy = c * c * lorentz - mu / r
    # Lorentz-1 = beta^2 Lorentz^2/(Lorentz+1) avoids the 1e-8-scale
    # cancellation, keeping the defect c^2 - E sharp for weak fields
    lm1 = beta2 * lorentz * lorentz / (lorentz + 1.0)
    defect = mu / r - c * c * lm1
    ang_mom = lorentz * np.cross(x, v)
    return ConservedQuantities(energy=energy, ang_mom=ang_mom, energy_defect=defect)


def orbit_from_conserved(
    q: ConservedQuantities,
    mu: float,
    c: float,
    phi0: float = 0.0,
    xi0: float | None = None,
) -> RcnOrbit:
    """Orbit elements generated by admissible (E, M).

    xi0 = None applies the convention t(0) = 0, which puts xi0 at
    -e E^2/c^4; the orbit then starts at r = a moving outward.
    """
    failures = q.admissibility_failures(mu, c)
    if failures:
        raise OrbitDomainError("inadmissible constants: " + "; ".join(failures))
    en = q.energy
    m_mag = q.ang_mom_mag
    c4 = c**4
    # c^4 - E^2 evaluated literally loses ~8 digits for weak fields
    # (E = c^2(1 - O(1e-8))); build it from the sharp half-defect.
    defect = q.half_defect(c) * (c * c + en)  # = c^4 - E^2 > 0
    a = mu * en / defect
    e = math.sqrt(max(0.0, mu * mu * c4 - c * c * m_mag * m_mag * defect)) / (mu * en)
    gamma = _gamma_of(mu, c, m_mag)
    omega = defect**1.5 / (mu * c**3)
    if xi0 is None:
        xi0 = -e * en * en / c4
    return RcnOrbit(
        a=a, e=e, gamma=gamma, phi0=phi0, xi0=xi0, omega=omega,
        energy=en, ang_mom_mag=m_mag, mu=mu, c=c,
    )


def third_kepler(
    p: PlanetElements, constants: PhysicalConstants, variant: str = "elliptic"
) -> float:
    """m10G from (omega, a) under the stated orbit law.

    elliptic:  omega^2 a^3 ((1 + sqrt(1 - 4 omega^2 a^2/c^2))/2)^(-3/2)
    circular:  omega^2 a^3 (1 - omega^2 a^2/c^2)^(-1/2)
    classical: omega^2 a^3
    """
    c = constants.c
    w = angular_frequency(p, constants)
    wa2 = p.speed_ratio_sq()  # omega^2 a^2 / c^2
    w2a3 = w * w * p.a**3
    if variant == "classical":
        return w2a3
    if variant == "circular":
        return w2a3 / math.sqrt(1.0 - wa2)
    if variant == "elliptic":
        disc = 1.0 - 4.0 * wa2
        if disc < 0.0:
            raise OrbitDomainError(f"elliptic branch needs 4 omega^2 a^2/c^2 < 1, got {4*wa2}")
        return w2a3 * (0.5 * (1.0 + math.sqrt(disc))) ** -1.5
    raise ValueError(f"unknown variant {variant!r}")


def orbit_from_elements(
    p: PlanetElements,
    constants: PhysicalConstants,
    variant: str = "elliptic",
    phi0: float | None = None,
) -> RcnOrbit:
    """Orbit with the element table's (a, e) and m10G from the Kepler law.

    Built directly from (a, e, mu) rather than by reconstructing the
    elements out of (E, M): the reconstruction would round a and omega
    through the tiny defect c^4 - E^2 and lose ~7 digits.
    """
    c = constants.c
    mu = third_kepler(p, constants, variant=variant)
    x = mu / (2.0 * p.a * c * c)
    root = math.sqrt(1.0 + x * x)
    en = c * c * (root - x)
    half_defect = c * c * (x - x * x / (1.0 + root))  # c^2 - E, sharp
    c4 = c**4
    m_mag = math.sqrt(mu * p.a * (c4 - p.e**2 * en * en) / (c * c * en))
    q = ConservedQuantities(energy=en, ang_mom=np.array([0.0, 0.0, m_mag]),
                            energy_defect=half_defect)
    failures = q.admissibility_failures(mu, c)
    if failures:
        raise OrbitDomainError("inadmissible constants: " + "; ".join(failures))
    # omega = (c^4-E^2)^(3/2)/(mu c^3) with c^4-E^2 = mu E/a exactly
    omega = math.sqrt(mu / p.a**3) * (en / (c * c)) ** 1.5
    return RcnOrbit(
        a=p.a, e=p.e, gamma=_gamma_of(mu, c, m_mag),
        phi0=p.phi0 if phi0 is None else phi0,
        xi0=-p.e * en * en / c4, omega=omega,
        energy=en, ang_mom_mag=m_mag, mu=mu, c=c,
    )


def radius_at_angle(o: RcnOrbit, phi: float) -> float:
    """Precessing-ellipse radius at azimuth phi."""
    den = 1.0 + o.e * math.cos(o.gamma * (phi - o.phi0))
    if den <= 0.0:
        raise OrbitDomainError("nonpositive orbit denominator (unbound geometry)")
    return o.a * (1.0 - o.e * o.e) / den


def time_of_xi(o: RcnOrbit, xi: float, mode: str = "exact") -> float:
    """t at phase xi; exact uses e E^2/c^4, approx uses e(1 - omega^2 a^2/c^2)."""
    if mode == "exact":
        kap = o.kappa
        return (xi - o.xi0 - kap * math.cos(xi)) / o.omega
    if mode == "approx":
        kap = o.e * (1.0 - o.speed_ratio_sq)
        return (xi + kap * (1.0 - math.cos(xi))) / o.omega
    raise ValueError(f"unknown mode {mode!r}")


def radius_of_xi(o: RcnOrbit, xi: float) -> float:
    return o.a * (1.0 + o.e * math.sin(xi))


def xi_of_time(o: RcnOrbit, t: float, mode: str = "exact") -> float:
    """Invert the time equation; monotone since dt/dxi >= (1-kappa)/omega > 0."""
    wt = o.omega * t
    if o.e == 0.0:
        return wt + (o.xi0 if mode == "exact" else 0.0)
    f = lambda xi: o.omega * time_of_xi(o, xi, mode=mode) - wt
    if mode == "exact":
        kap = o.kappa
        center = wt + o.xi0 + kap  # = wt under the default t(0)=0 convention
    else:
        kap = o.e * (1.0 - o.speed_ratio_sq)
        center = wt
    df = lambda xi: 1.0 + kap * math.sin(xi)
    pad = 2.0 * o.e + 1e-9
    return newton_bracketed(f, df, center - pad, center + pad, x0=center,
                            xtol=1e-13, maxiter=50)


def phase_of_xi(o: RcnOrbit, xi: float) -> tuple[float, float]:
    """(r, phi) at phase xi with phi unwound continuously across turns.

    The orbit equation gives cos(gamma(phi-phi0)) = -(e+sin xi)/(1+e sin xi);
    the matching sine is sqrt(1-e^2) cos xi/(1+e sin xi), and the winding
    number floor((xi + 3 pi/2)/(2 pi)) counts completed perihelion passages
    (the passage before t=0 sits at xi = -pi/2).
    """
    sx, cx = math.sin(xi), math.cos(xi)
    den = 1.0 + o.e * sx
    r = o.a * den
    w = math.atan2(math.sqrt(1.0 - o.e * o.e) * cx, -(o.e + sx))
    w += 2.0 * math.pi * math.floor((xi + 1.5 * math.pi) / (2.0 * math.pi))
    return r, o.phi0 + w / o.gamma


def state_at_time(o: RcnOrbit, t: float) -> WorldlineSample:
    """Planar worldline sample (third axis along M) from the closed form."""
    xi = xi_of_time(o, t, mode="exact")
    r, phi = phase_of_xi(o, xi)
    sx, cx = math.sin(xi), math.cos(xi)
    xidot = o.omega / (1.0 + o.kappa * sx)
    rdot = o.a * o.e * cx * xidot
    phidot = math.sqrt(1.0 - o.e * o.e) / (o.gamma * (1.0 + o.e * sx)) * xidot
    cp, sp = math.cos(phi), math.sin(phi)
    x = np.array([r * cp, r * sp, 0.0])
    v = np.array([rdot * cp - r * phidot * sp, rdot * sp + r * phidot * cp, 0.0])
    return WorldlineSample(t=t, x=x, v=v)


@dataclass(frozen=True)
class RcnAcceleration:
    momentum_rate: np.ndarray   # d/dt of (1-|v|^2/c^2)^(-1/2) v, m/s^2
    velocity_rate: np.ndarray   # dv/dt, m/s^2


def rcn_rhs(s: WorldlineSample, mu: float, c: float) -> RcnAcceleration:
    """Force per unit mass and the equivalent velocity derivative.

    du/dt = F = -mu x/r^3; expanding u = Lorentz(v) v gives
    dv/dt = (F - (v.F) v/c^2) sqrt(1 - |v|^2/c^2).
    """
    x = np.asarray(s.x, float)
    v = np.asarray(s.v, float)
    r = float(np.linalg.norm(x))
    if r <= 0.0:
        raise OrbitDomainError("zero radius")
    beta2 = float(v @ v) / (c * c)
    if beta2 >= 1.0:
        raise OrbitDomainError("superluminal state")
    force = -mu * x / r**3
    vdot = (force - (float(v @ force) / (c * c)) * v) * math.sqrt(1.0 - beta2)
    return RcnAcceleration(momentum_rate=force, velocity_rate=vdot)


@dataclass(frozen=True)
class AdvanceSummary:
    body: str
    model: str
    gamma: float
    one_minus_gamma: float
    arcsec_per_period: float
    n_periods: int
    arcsec_per_century: float


def periods_per_century(p: PlanetElements, earth: PlanetElements,
                        constants: PhysicalConstants) -> int:
    """Completed orbits of p in 100 Earth years (415 for Mercury)."""
    return int(math.floor(100.0 * period(earth, constants) / period(p, constants)))


def advance_per_century_sun(
    p: PlanetElements,
    constants: PhysicalConstants,
    earth: PlanetElements | None = None,
    n_periods: int | None = None,
) -> AdvanceSummary:
    """Sun-frame perihelion advance, (1/gamma - 1) * 360 * 3600 arcsec/orbit.

    n_periods defaults to the completed orbits within 100 Earth years,
    which needs the earth elements; pass n_periods explicitly to pin it.
    """
    o = orbit_from_elements(p, constants)
    if n_periods is None:
        if earth is None:
            raise ValueError("need either earth elements or an explicit n_periods")
        n_periods = periods_per_century(p, earth, constants)
    per_period = (1.0 / o.gamma - 1.0) * 360.0 * 3600.0
    return AdvanceSummary(
        body=p.name,
        model="rcn",
        gamma=o.gamma,
        one_minus_gamma=o.one_minus_gamma,
        arcsec_per_period=per_period,
        n_periods=n_periods,
        arcsec_per_century=per_period * n_periods,
    )
