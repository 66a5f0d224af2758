"""Physical constants and the planetary element table.

The table stores, per body, the semi-major axis a, the eccentricity e, and
the strength parameter omega^2 a^3 / c^2 in meters (the sun's GM divided by
c^2, as inferred from that body's own period and axis).  The angular
frequency omega is always derived from these, never stored, so the table
stays consistent under a rescaling of the speed of light.

Tables load from TOML.  A user file only needs the bodies and fields it
wants to override; everything else is taken from the built-in defaults.
"""

from __future__ import annotations

import dataclasses
import math

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib  # type: ignore[no-redef]

from dataclasses import dataclass, replace
from typing import Iterable

__all__ = [
    "EphemerisError",
    "PhysicalConstants",
    "PlanetElements",
    "EphemerisTable",
    "load_default",
    "load_file",
    "loads",
    "serialize",
    "scale_speed_of_light",
]


class EphemerisError(ValueError):
    """Raised for malformed tables or element values outside their domain."""


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = 2.99792458e8   # speed of light, m/s
    G: float = 6.673e-11      # gravitational constant, m^3 kg^-1 s^-2

    def __post_init__(self) -> None:
        if not (self.c > 0.0 and math.isfinite(self.c)):
            raise EphemerisError(f"constants.c must be finite and positive, got {self.c}")
        if not (self.G > 0.0 and math.isfinite(self.G)):
            raise EphemerisError(f"constants.G must be finite and positive, got {self.G}")


@dataclass(frozen=True)
class PlanetElements:
    """Orbital elements of one body around the resting sun.

    gm_over_c2 is omega^2 a^3 / c^2 in meters; it plays the role of the
    sun's GM/c^2 as seen through this body's orbit.  theta tilts the orbit
    plane out of the reference plane (only Mercury carries a nonzero value
    by default), phi0 is the perihelion azimuth, and mass_ratio is the
    body's mass in units of the sun's.
    """

    index: int
    name: str
    a: float                 # semi-major axis, m
    e: float                 # eccentricity
    gm_over_c2: float        # omega^2 a^3 / c^2, m
    theta: float = 0.0       # orbit plane tilt, rad
    phi0: float = 0.0        # perihelion azimuth, rad
    mass_ratio: float = 0.0  # body mass / sun mass

    def __post_init__(self) -> None:
        ctx = f"body {self.index} ({self.name!r})"
        if not isinstance(self.index, int) or self.index < 1:
            raise EphemerisError(f"{ctx}: field 'index' must be a positive integer")
        if not self.name:
            raise EphemerisError(f"{ctx}: field 'name' must be nonempty")
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise EphemerisError(f"{ctx}: field 'a' must be finite and positive, got {self.a}")
        if not (0.0 <= self.e < 1.0):
            raise EphemerisError(f"{ctx}: field 'e' must satisfy 0 <= e < 1, got {self.e}")
        if not (self.gm_over_c2 > 0.0 and math.isfinite(self.gm_over_c2)):
            raise EphemerisError(
                f"{ctx}: field 'gm_over_c2' must be finite and positive, got {self.gm_over_c2}"
            )
        if not math.isfinite(self.theta):
            raise EphemerisError(f"{ctx}: field 'theta' must be finite")
        if not math.isfinite(self.phi0):
            raise EphemerisError(f"{ctx}: field 'phi0' must be finite")
        if not (self.mass_ratio >= 0.0 and math.isfinite(self.mass_ratio)):
            raise EphemerisError(f"{ctx}: field 'mass_ratio' must be finite and >= 0")

    def speed_ratio_sq(self) -> float:
        """omega^2 a^2 / c^2, the square of the orbital speed scale over c."""
        return self.gm_over_c2 / self.a


def angular_frequency(body: PlanetElements, constants: PhysicalConstants) -> float:
    """omega = c * sqrt(gm_over_c2 / a^3), rad/s."""
    return constants.c * math.sqrt(body.gm_over_c2 / body.a**3)


def period(body: PlanetElements, constants: PhysicalConstants) -> float:
    """Orbital period 2 pi / omega, s."""
    return 2.0 * math.pi / angular_frequency(body, constants)


@dataclass(frozen=True)
class EphemerisTable:
    constants: PhysicalConstants
    bodies: tuple[PlanetElements, ...]

    def __post_init__(self) -> None:
        seen: dict[int, str] = {}
        for b in self.bodies:
            if b.index in seen:
                raise EphemerisError(
                    f"duplicate body index {b.index} ({seen[b.index]!r} and {b.name!r})"
                )
            seen[b.index] = b.name
            if b.name == "sun" and b.mass_ratio != 1.0:
                raise EphemerisError(
                    f"body {b.index} ('sun'): field 'mass_ratio' must be 1, got {b.mass_ratio}"
                )
            # Keplerian weak-field regime: orbital speeds stay far below c.
            if b.speed_ratio_sq() >= 3e-8:
                raise EphemerisError(
                    f"body {b.index} ({b.name!r}): field 'gm_over_c2' over 'a' is "
                    f"{b.speed_ratio_sq():.3e}, outside the weak-field domain (< 3e-8)"
                )

    def body(self, key: int | str) -> PlanetElements:
        for b in self.bodies:
            if b.index == key or b.name == key:
                return b
        raise KeyError(f"no body {key!r} in ephemeris table")

    def __contains__(self, key: object) -> bool:
        try:
            self.body(key)  # type: ignore[arg-type]
        except KeyError:
            return False
        return True

    def planets(self) -> tuple[PlanetElements, ...]:
        return tuple(b for b in self.bodies if b.name != "sun")

    def angular_frequency(self, key: int | str) -> float:
        return angular_frequency(self.body(key), self.constants)

    def period(self, key: int | str) -> float:
        return period(self.body(key), self.constants)


# Default element table.  a in meters, gm_over_c2 in meters (per-body value
# as each orbit's omega^2 a^3 / c^2 rounds to it), theta in radians.
# Mass ratios: Jupiter and Earth are the values used elsewhere in the
# package's validation chain; the remaining ratios are standard fill-ins
# carried for completeness and exercised by no computation here.
_DEFAULT_ROWS: tuple[tuple[int, str, float, float, float, float, float], ...] = (
    # index, name, a [m], e, gm_over_c2 [m], theta [rad], mass_ratio
    (1, "mercury", 0.5791e11, 0.21, 1477.0, math.radians(7.0), 0.166e-6),
    (2, "venus", 1.0821e11, 0.007, 1477.0, 0.0, 2.448e-6),
    (3, "earth", 1.4960e11, 0.017, 1477.0, 0.0, 3.01e-6),
    (4, "mars", 2.2794e11, 0.093, 1477.0, 0.0, 0.323e-6),
    (5, "jupiter", 7.783e11, 0.048, 1478.0, 0.0, 0.95e-3),
    (6, "saturn", 14.27e11, 0.056, 1477.0, 0.0, 0.286e-3),
    (7, "uranus", 28.69e11, 0.047, 1476.0, 0.0, 43.7e-6),
    (8, "neptune", 44.98e11, 0.009, 1478.0, 0.0, 51.5e-6),
    (9, "pluto", 59.00e11, 0.249, 1469.0, 0.0, 0.007e-6),
)

# The sun itself: mass_ratio 1 by definition.  The orbital fields are inert
# placeholders (a body at rest has no orbit); they satisfy the element
# domain so the row can live in the same table.
_SUN_ROW = (10, "sun", 1.0e11, 0.0, 1477.0, 0.0, 1.0)


def load_default() -> EphemerisTable:
    constants = PhysicalConstants()
    bodies = tuple(
        PlanetElements(index=i, name=n, a=a, e=e, gm_over_c2=gm, theta=th, mass_ratio=mr)
        for (i, n, a, e, gm, th, mr) in (*_DEFAULT_ROWS, _SUN_ROW)
    )
    return EphemerisTable(constants=constants, bodies=bodies)


_BODY_FIELDS = {f.name: f for f in dataclasses.fields(PlanetElements)}
_CONST_FIELDS = {f.name for f in dataclasses.fields(PhysicalConstants)}


def _merge_body(base: PlanetElements | None, raw: dict, where: str) -> PlanetElements:
    for key in raw:
        if key not in _BODY_FIELDS:
            raise EphemerisError(f"{where}: unknown field {key!r}")
    for key, val in raw.items():
        want_int = key == "index"
        if want_int:
            if not isinstance(val, int):
                raise EphemerisError(f"{where}: field 'index' must be an integer, got {val!r}")
        elif key == "name":
            if not isinstance(val, str):
                raise EphemerisError(f"{where}: field 'name' must be a string, got {val!r}")
        elif not isinstance(val, (int, float)) or isinstance(val, bool):
            raise EphemerisError(f"{where}: field {key!r} must be a number, got {val!r}")
    if base is None:
        missing = [k for k in ("index", "name", "a", "e", "gm_over_c2") if k not in raw]
        if missing:
            raise EphemerisError(f"{where}: new body is missing fields {missing}")
        merged = dict(raw)
    else:
        merged = {f: getattr(base, f) for f in _BODY_FIELDS}
        merged.update(raw)
    try:
        return PlanetElements(**{k: (v if k in ("index", "name") else float(v))
                                 for k, v in merged.items()})
    except EphemerisError as exc:
        raise EphemerisError(f"{where}: {exc}") from None


def loads(text: str, defaults: EphemerisTable | None = None) -> EphemerisTable:
    """Parse a TOML element table, overriding defaults body by body.

    Bodies are matched by index (or by name when no index is given).  A
    body entry carrying fields only updates those fields; an entry with an
    unknown index must supply the full element set.  Errors name the
    offending entry and field.
    """
    if defaults is None:
        defaults = load_default()
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise EphemerisError(f"TOML parse error: {exc}") from None

    for key in doc:
        if key not in ("constants", "bodies"):
            raise EphemerisError(f"unknown top-level table {key!r}")

    craw = doc.get("constants", {})
    if not isinstance(craw, dict):
        raise EphemerisError("[constants] must be a table")
    for key in craw:
        if key not in _CONST_FIELDS:
            raise EphemerisError(f"[constants]: unknown field {key!r}")
        if not isinstance(craw[key], (int, float)) or isinstance(craw[key], bool):
            raise EphemerisError(f"[constants]: field {key!r} must be a number")
    constants = replace(defaults.constants, **{k: float(v) for k, v in craw.items()})

    by_index = {b.index: b for b in defaults.bodies}
    by_name = {b.name: b for b in defaults.bodies}
    braw = doc.get("bodies", [])
    if not isinstance(braw, list):
        raise EphemerisError("[[bodies]] must be an array of tables")
    for pos, entry in enumerate(braw):
        where = f"bodies[{pos}]"
        if not isinstance(entry, dict):
            raise EphemerisError(f"{where}: must be a table")
        base = None
        if "index" in entry:
            if not isinstance(entry["index"], int):
                raise EphemerisError(f"{where}: field 'index' must be an integer")
            base = by_index.get(entry["index"])
        elif "name" in entry:
            base = by_name.get(entry["name"])
            if base is None:
                raise EphemerisError(f"{where}: unknown body name {entry['name']!r} "
                                     "(new bodies must carry an index)")
        else:
            raise EphemerisError(f"{where}: entry needs an 'index' or 'name' to match")
        merged = _merge_body(base, entry, where)
        if base is not None and base.name in by_name and merged.name != base.name:
            del by_name[base.name]
        by_index[merged.index] = merged
        by_name[merged.name] = merged

    bodies = tuple(sorted(by_index.values(), key=lambda b: b.index))
    return EphemerisTable(constants=constants, bodies=bodies)


def load_file(path: str, defaults: EphemerisTable | None = None) -> EphemerisTable:
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    try:
        return loads(text, defaults=defaults)
    except EphemerisError as exc:
        raise EphemerisError(f"{path}: {exc}") from None


def _fmt(value: float | int | str) -> str:
    if isinstance(value, str):
        return '"' + value + '"'
    if isinstance(value, int):
        return str(value)
    # repr round-trips doubles exactly; TOML floats need a dot or exponent
    out = repr(float(value))
    return out if ("." in out or "e" in out or "E" in out) else out + ".0"


def serialize(table: EphemerisTable) -> str:
    """Render a table as TOML; loads(serialize(t)) == t."""
    lines = ["[constants]"]
    lines.append(f"c = {_fmt(table.constants.c)}")
    lines.append(f"G = {_fmt(table.constants.G)}")
    for b in table.bodies:
        lines.append("")
        lines.append("[[bodies]]")
        for f in _BODY_FIELDS:
            lines.append(f"{f} = {_fmt(getattr(b, f))}")
    return "\n".join(lines) + "\n"


def scale_speed_of_light(table: EphemerisTable, factor: float) -> EphemerisTable:
    """Rescale c by `factor` holding every (omega, a, e) fixed.

    omega = c sqrt(gm_over_c2 / a^3) stays put exactly when gm_over_c2
    shrinks by factor^2, so all orbit geometry survives and every 1/c^2
    correction scales by 1/factor^2.  Factors below 1 strengthen the field
    and can push bodies out of the weak-field domain the table enforces.
    """
    if not (factor > 0.0 and math.isfinite(factor)):
        raise EphemerisError(f"c-scale factor must be finite and positive, got {factor}")
    constants = replace(table.constants, c=table.constants.c * factor)
    bodies = tuple(replace(b, gm_over_c2=b.gm_over_c2 / factor**2) for b in table.bodies)
    return EphemerisTable(constants=constants, bodies=bodies)
