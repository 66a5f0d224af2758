"""Element table: default values, derived frequencies, file loading."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perihelion import ephemeris
from perihelion.ephemeris import (
    EphemerisError,
    EphemerisTable,
    PhysicalConstants,
    PlanetElements,
    load_default,
    loads,
    serialize,
    scale_speed_of_light,
)

# Printed two-digit speed-ratio table omega^2 a^2 / c^2, one entry per planet.
SPEED_RATIO_SQ_PRINTED = {
    "mercury": 2.6e-8,
    "venus": 1.4e-8,
    "earth": 9.9e-9,
    "mars": 6.5e-9,
    "jupiter": 1.9e-9,
    "saturn": 1.04e-9,
    "uranus": 5.1e-10,
    "neptune": 3.3e-10,
    "pluto": 2.5e-10,
}


def last_digit_unit(x: float) -> float:
    """One unit in the last printed digit of a short decimal like 2.6e-8."""
    from decimal import Decimal

    d = Decimal(repr(x))
    return float(Decimal(1).scaleb(d.as_tuple().exponent))


def test_default_table_headline_values():
    t = load_default()
    assert t.body("mercury").a == 0.5791e11
    assert t.body("mercury").gm_over_c2 == 1477.0
    assert t.body("mercury").e == 0.21
    assert t.body("venus").e == 0.007
    assert t.body("earth").a == 1.4960e11
    assert t.body("pluto").a == 59.00e11
    assert t.body("pluto").e == 0.249
    assert t.body(9).gm_over_c2 == 1469.0
    assert t.body("uranus").gm_over_c2 == 1476.0
    assert t.body("jupiter").gm_over_c2 == 1478.0
    assert t.constants.c == 2.99792458e8
    assert t.constants.G == 6.673e-11


def test_default_table_tilt_and_masses():
    t = load_default()
    assert t.body("mercury").theta == pytest.approx(math.radians(7.0), abs=0)
    for b in t.planets():
        if b.name != "mercury":
            assert b.theta == 0.0
        assert b.phi0 == 0.0
    assert t.body("jupiter").mass_ratio == 0.95e-3
    assert t.body("earth").mass_ratio == 3.01e-6
    assert t.body("sun").mass_ratio == 1.0
    assert t.body(10).name == "sun"
    assert len(t.bodies) == 10
    assert len(t.planets()) == 9


def test_mercury_earth_frequencies():
    t = load_default()
    c = t.constants.c
    w1 = t.angular_frequency("mercury")
    w3 = t.angular_frequency("earth")
    # printed values 275.8e-17 and 66.41e-17 1/m, one last-digit unit each
    assert abs(w1 / c - 275.8e-17) < 0.1e-17
    assert abs(w3 / c - 66.41e-17) < 0.01e-17
    assert abs(t.period("earth") / t.period("mercury") - 4.15) < 5e-3


def test_speed_ratio_table_matches_printed_digits():
    t = load_default()
    for name, printed in SPEED_RATIO_SQ_PRINTED.items():
        got = t.body(name).speed_ratio_sq()
        assert abs(got - printed) < 0.55 * last_digit_unit(printed), name


def test_weak_field_invariant():
    for b in load_default().bodies:
        assert b.speed_ratio_sq() < 3e-8


def test_period_frequency_consistency():
    t = load_default()
    for b in t.planets():
        w = ephemeris.angular_frequency(b, t.constants)
        assert ephemeris.period(b, t.constants) == pytest.approx(2 * math.pi / w, rel=1e-15)


def test_serialize_round_trip():
    t = load_default()
    assert loads(serialize(t)) == t


def test_load_file_round_trip(tmp_path):
    p = tmp_path / "eph.toml"
    p.write_text(serialize(load_default()))
    assert ephemeris.load_file(str(p)) == load_default()


def test_override_is_merged_over_defaults():
    t = loads('[[bodies]]\nindex = 1\ne = 0.21\n')
    assert t == load_default()
    t2 = loads('[[bodies]]\nname = "mercury"\ne = 0.3\n')
    assert t2.body("mercury").e == 0.3
    assert t2.body("mercury").a == 0.5791e11  # untouched fields kept
    assert t2.body("venus") == load_default().body("venus")


def test_constants_override():
    t = loads("[constants]\nc = 1.0e8\n")
    assert t.constants.c == 1.0e8
    assert t.constants.G == 6.673e-11


def test_bad_eccentricity_names_field():
    with pytest.raises(EphemerisError, match="'e'"):
        loads("[[bodies]]\nindex = 1\ne = 1.2\n")


def test_bad_axis_names_field():
    with pytest.raises(EphemerisError, match="'a'"):
        loads("[[bodies]]\nindex = 1\na = -2.0\n")


def test_unknown_field_named():
    with pytest.raises(EphemerisError, match="'period'"):
        loads("[[bodies]]\nindex = 1\nperiod = 88.0\n")


def test_parse_error_reported():
    with pytest.raises(EphemerisError, match="TOML parse error"):
        loads("[[bodies]\nindex = 1\n")


def test_new_body_requires_full_elements():
    with pytest.raises(EphemerisError, match="missing fields"):
        loads("[[bodies]]\nindex = 11\nname = \"vulcan\"\n")
    t = loads(
        "[[bodies]]\nindex = 11\nname = \"vulcan\"\n"
        "a = 1.0e11\ne = 0.0\ngm_over_c2 = 1477.0\n"
    )
    v = t.body("vulcan")
    assert v.e == 0.0 and v.a == 1.0e11
    assert len(t.bodies) == 11


def test_duplicate_index_rejected():
    c = PhysicalConstants()
    b = load_default().body(1)
    import dataclasses

    b2 = dataclasses.replace(b, name="mercury2")
    with pytest.raises(EphemerisError, match="duplicate"):
        EphemerisTable(constants=c, bodies=(b, b2))


def test_sun_mass_ratio_enforced():
    with pytest.raises(EphemerisError, match="mass_ratio"):
        loads('[[bodies]]\nindex = 10\nmass_ratio = 0.5\n')


def test_strong_field_body_rejected():
    with pytest.raises(EphemerisError, match="weak-field"):
        loads("[[bodies]]\nindex = 1\ngm_over_c2 = 1.0e5\n")


def test_bad_constants_rejected():
    with pytest.raises(EphemerisError, match="constants.c"):
        PhysicalConstants(c=-1.0)
    with pytest.raises(EphemerisError, match="'q'"):
        loads("[constants]\nq = 3\n")


@given(factor=st.floats(min_value=1.0, max_value=1.0e3))
@settings(max_examples=60, deadline=None)
def test_c_scaling_keeps_orbits_fixed(factor):
    t = load_default()
    s = scale_speed_of_light(t, factor)
    assert s.constants.c == t.constants.c * factor
    for b, bs in zip(t.planets(), s.planets()):
        w0 = ephemeris.angular_frequency(b, t.constants)
        w1 = ephemeris.angular_frequency(bs, s.constants)
        assert w1 == pytest.approx(w0, rel=1e-12)
        assert bs.a == b.a and bs.e == b.e
        assert bs.speed_ratio_sq() == pytest.approx(b.speed_ratio_sq() / factor**2, rel=1e-12)


@given(
    a=st.floats(min_value=1e10, max_value=1e13),
    gm=st.floats(min_value=100.0, max_value=2000.0),
)
@settings(max_examples=60, deadline=None)
def test_frequency_positive_and_monotone_in_gm(a, gm):
    c = PhysicalConstants()
    body = PlanetElements(index=1, name="x", a=a, e=0.1, gm_over_c2=gm)
    w = ephemeris.angular_frequency(body, c)
    assert w > 0
    assert w == pytest.approx(c.c * math.sqrt(gm / a**3), rel=1e-15)
