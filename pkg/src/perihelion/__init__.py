"""Planetary orbit models: relativistic momentum dynamics vs metric geodesics.

The package cross-validates two descriptions of a planet bound to a resting
sun: a relativistic force law built on retarded vector potentials, and
geodesic motion in a static spherically symmetric metric.  Both predict a
slowly precessing ellipse; the precession rates differ by a factor of six.
An observation pipeline converts Mercury perihelion epochs into the advance
angle seen from Earth.
"""

__version__ = "0.1.0"

from .ephemeris import (
    PhysicalConstants,
    PlanetElements,
    EphemerisTable,
    load_default,
    load_file,
)

__all__ = [
    "__version__",
    "PhysicalConstants",
    "PlanetElements",
    "EphemerisTable",
    "load_default",
    "load_file",
]
