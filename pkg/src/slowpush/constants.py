"""Physical and geodetic constants shared across the package.

All dynamics run in SI units (m, s, kg) in the heliocentric ecliptic
frame aligned to the J2000 equinox; angles in radians unless a name
says otherwise.
"""

import numpy as np

AU = 1.495978707e11            # m
DAY = 86400.0                  # s
C_LIGHT = 299792458.0          # m/s
G0 = 9.80665                   # m/s^2, propellant bookkeeping standard gravity

MJD_JD_OFFSET = 2400000.5
MJD_J2000 = 51544.5            # J2000.0 as MJD
JD_J2000 = 2451545.0

GM_SUN = 1.32712440018e20      # m^3/s^2

# Perturbing bodies in kernel order: the 8 planets, the Moon, then the
# three most massive main-belt asteroids.
GM_MERCURY = 2.2032e13
GM_VENUS = 3.24858599e14
GM_EARTH = 3.986004418e14
GM_MARS = 4.282837e13
GM_JUPITER = 1.26712764e17
GM_SATURN = 3.79405852e16
GM_URANUS = 5.794548e15
GM_NEPTUNE = 6.8365271e15
GM_MOON = 4.902800066e12
GM_CERES = 6.26325e10
GM_VESTA = 1.72883e10
GM_PALLAS = 1.4301e10

KERNEL_GM = np.array([
    GM_MERCURY, GM_VENUS, GM_EARTH, GM_MARS, GM_JUPITER, GM_SATURN,
    GM_URANUS, GM_NEPTUNE, GM_MOON, GM_CERES, GM_VESTA, GM_PALLAS,
])

# Earth-Moon barycenter split: Moon mass fraction of the system.
EMB_MOON_FRACTION = GM_MOON / (GM_EARTH + GM_MOON)

# Time scales: a single constant offset stands in for TDB-to-UTC
# (TT-TAI + 37 leap seconds, TT~TDB); sub-minute detail is irrelevant
# at the precision reported here.
DELTA_T_S = 69.184

# Earth rotation angle polynomial (UT1~UTC assumed).
ERA_0 = 0.7790572732640
ERA_RATE = 1.00273781191135448     # rev/day

OBLIQUITY_ARCSEC = 84381.406       # mean obliquity at J2000
OBLIQUITY_RAD = np.deg2rad(OBLIQUITY_ARCSEC / 3600.0)

# WGS84 ellipsoid.
WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_B = WGS84_A * (1.0 - WGS84_F)
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)

# Spherical Earth radius for targeting metrics and raster cell areas
# only, never for dynamics.
R_MEAN_KM = 6371.0088

MONTH_DAYS = 30.4375           # mean month used by duration sweeps
