"""Epochs, frame rotations, Earth orientation, and geodetic conversions.

The dynamical frame everywhere in this package is heliocentric ecliptic
J2000.  Earth-fixed quantities are reached by rotating ecliptic to
equatorial (obliquity about x) and then by the Earth rotation angle.
No precession, nutation, or polar motion: the placement error is far
below the 100 km radius of action the consequence model works with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import (
    DAY,
    DELTA_T_S,
    ERA_0,
    ERA_RATE,
    JD_J2000,
    MJD_JD_OFFSET,
    OBLIQUITY_RAD,
    WGS84_A,
    WGS84_E2,
)
from .errors import ConvergenceError, DomainError


@dataclass(frozen=True, order=True)
class Epoch:
    """A continuous day count (Modified Julian Date).

    The field name records the default dynamical scale (TDB).  Epochs
    carrying UTC day counts use the same container; context (field or
    variable names ending in _utc) marks the scale.
    """

    mjd_tdb: float

    def __post_init__(self):
        if not math.isfinite(self.mjd_tdb):
            raise DomainError(f"epoch must be finite, got {self.mjd_tdb}")

    def __sub__(self, other: "Epoch") -> float:
        """Difference in seconds."""
        return (self.mjd_tdb - other.mjd_tdb) * DAY

    def plus_days(self, days: float) -> "Epoch":
        return Epoch(self.mjd_tdb + days)

    def plus_seconds(self, seconds: float) -> "Epoch":
        return Epoch(self.mjd_tdb + seconds / DAY)


@dataclass(frozen=True)
class GeodeticPoint:
    """Geodetic latitude/longitude (deg) and height above the WGS84 ellipsoid (m)."""

    lat_deg: float
    lon_deg: float
    alt_m: float = 0.0

    def __post_init__(self):
        if not (-90.0 <= self.lat_deg <= 90.0):
            raise DomainError(f"latitude out of range: {self.lat_deg}")
        # wrap longitude to (-180, 180]
        lon = math.remainder(self.lon_deg, 360.0)
        if lon <= -180.0:
            lon += 360.0
        object.__setattr__(self, "lon_deg", lon)


def tdb_to_utc(e: Epoch) -> Epoch:
    """UTC epoch for a dynamical-scale epoch (constant offset)."""
    return Epoch(e.mjd_tdb - DELTA_T_S / DAY)


def utc_to_tdb(e: Epoch) -> Epoch:
    """Inverse of tdb_to_utc; round-trips exactly."""
    return Epoch(e.mjd_tdb + DELTA_T_S / DAY)


def earth_rotation_angle(e: Epoch) -> float:
    """Earth rotation angle (rad, [0, 2pi)) at a UT epoch."""
    du = e.mjd_tdb + MJD_JD_OFFSET - JD_J2000
    frac = (ERA_0 + ERA_RATE * du) % 1.0
    return 2.0 * math.pi * frac


def ecliptic_to_equatorial(v: np.ndarray) -> np.ndarray:
    """Rotate an ecliptic-frame vector to the equatorial frame (about +x)."""
    c, s = math.cos(OBLIQUITY_RAD), math.sin(OBLIQUITY_RAD)
    v = np.asarray(v, dtype=float)
    return np.array([v[0], c * v[1] - s * v[2], s * v[1] + c * v[2]])


def equatorial_to_ecliptic(v: np.ndarray) -> np.ndarray:
    """Inverse of ecliptic_to_equatorial."""
    c, s = math.cos(OBLIQUITY_RAD), math.sin(OBLIQUITY_RAD)
    v = np.asarray(v, dtype=float)
    return np.array([v[0], c * v[1] + s * v[2], -s * v[1] + c * v[2]])


def equatorial_to_ecef(v: np.ndarray, e_tdb: Epoch) -> np.ndarray:
    """Rotate an inertial equatorial vector into the rotating Earth-fixed frame."""
    theta = earth_rotation_angle(tdb_to_utc(e_tdb))
    c, s = math.cos(theta), math.sin(theta)
    v = np.asarray(v, dtype=float)
    return np.array([c * v[0] + s * v[1], -s * v[0] + c * v[1], v[2]])


def ecef_to_equatorial(v: np.ndarray, e_tdb: Epoch) -> np.ndarray:
    """Inverse of equatorial_to_ecef at the same epoch."""
    theta = earth_rotation_angle(tdb_to_utc(e_tdb))
    c, s = math.cos(theta), math.sin(theta)
    v = np.asarray(v, dtype=float)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]])


def ecef_to_geodetic(r_ecef: np.ndarray) -> GeodeticPoint:
    """Geodetic point for an Earth-fixed position (iterative latitude solve)."""
    x, y, z = (float(c) for c in r_ecef)
    p = math.hypot(x, y)
    if p == 0.0 and z == 0.0:
        raise DomainError("geodetic conversion undefined at the geocenter")
    lon = math.degrees(math.atan2(y, x))
    lat = math.atan2(z, p * (1.0 - WGS84_E2))
    converged = False
    for _ in range(50):
        sin_lat = math.sin(lat)
        n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
        if p > 1.0:
            alt = p / math.cos(lat) - n
            lat_new = math.atan2(z, p * (1.0 - WGS84_E2 * n / (n + alt)))
        else:
            # polar axis: latitude is exactly +-90
            alt = abs(z) - n * (1.0 - WGS84_E2)
            lat_new = math.copysign(math.pi / 2.0, z)
        if abs(lat_new - lat) < 1e-12:
            lat = lat_new
            converged = True
            break
        lat = lat_new
    if not converged:
        raise ConvergenceError(f"geodetic latitude did not converge for input {r_ecef}")
    sin_lat = math.sin(lat)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
    if p > 1.0:
        alt = p / math.cos(lat) - n
    else:
        alt = abs(z) - n * (1.0 - WGS84_E2)
    return GeodeticPoint(math.degrees(lat), lon, alt)


def geodetic_to_ecef(pt: GeodeticPoint) -> np.ndarray:
    """Earth-fixed position of a geodetic point."""
    lat = math.radians(pt.lat_deg)
    lon = math.radians(pt.lon_deg)
    sin_lat = math.sin(lat)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
    r_xy = (n + pt.alt_m) * math.cos(lat)
    return np.array([
        r_xy * math.cos(lon),
        r_xy * math.sin(lon),
        (n * (1.0 - WGS84_E2) + pt.alt_m) * sin_lat,
    ])
