"""Equinoctial orbital elements and conversions to/from Cartesian states.

Convention: p1 = e sin(peri_lon), p2 = e cos(peri_lon),
q1 = tan(i/2) sin(node), q2 = tan(i/2) cos(node),
mean longitude = peri_lon + mean anomaly, prograde orbits only.
A swapped reading (p1/p2 and q1/q2 interchanged) is selectable for
falsification, since published element tables do not always state
their ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import AU, GM_SUN, JD_J2000, MJD_JD_OFFSET
from .errors import ConvergenceError, DomainError
from .timeframes import Epoch

# Element-plane readings: element sets published at a modern epoch are
# frequently referred to the mean ecliptic of that date rather than the
# J2000 ecliptic; both readings are supported and the of-date reading
# is the default (it is the one that reproduces the reference
# scenario's ground corridor).
FRAME_OF_DATE = "ecliptic-of-date"
FRAME_J2000 = "ecliptic-j2000"

CONVENTION_STANDARD = "standard"
CONVENTION_SWAPPED = "swapped"


@dataclass(frozen=True)
class EquinoctialElements:
    """Nonsingular element set for an elliptic heliocentric orbit."""

    a: float            # semi-major axis, m
    p1: float           # e sin(peri_lon)
    p2: float           # e cos(peri_lon)
    q1: float           # tan(i/2) sin(node)
    q2: float           # tan(i/2) cos(node)
    ml_deg: float       # mean longitude, deg
    epoch: Epoch

    def __post_init__(self):
        vals = (self.a, self.p1, self.p2, self.q1, self.q2, self.ml_deg)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("elements must be finite")
        if self.a <= 0.0:
            raise DomainError(f"semi-major axis must be positive, got {self.a}")
        if self.p1 ** 2 + self.p2 ** 2 >= 1.0:
            raise DomainError("eccentricity must be below 1")

    @property
    def eccentricity(self) -> float:
        return math.hypot(self.p1, self.p2)

    @property
    def inclination_deg(self) -> float:
        return math.degrees(2.0 * math.atan(math.hypot(self.q1, self.q2)))

    @property
    def perihelion_m(self) -> float:
        return self.a * (1.0 - self.eccentricity)

    def with_epoch(self, epoch: Epoch) -> "EquinoctialElements":
        """Same element values re-dated to a different epoch."""
        return replace(self, epoch=epoch)


@dataclass(frozen=True)
class StateVector:
    """Heliocentric ecliptic J2000 position (m) and velocity (m/s)."""

    r: np.ndarray
    v: np.ndarray
    epoch: Epoch

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).reshape(3)
        v = np.asarray(self.v, dtype=float).reshape(3)
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
            raise DomainError("state components must be finite")
        # |r| = 0 is allowed only so the Sun's own (identically zero)
        # state fits the type; orbit operations check it themselves
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "v", v)

    def as_array(self) -> np.ndarray:
        return np.concatenate((self.r, self.v))

    @classmethod
    def from_array(cls, y: np.ndarray, epoch: Epoch) -> "StateVector":
        y = np.asarray(y, dtype=float)
        return cls(y[:3].copy(), y[3:6].copy(), epoch)


def solve_eccentric_longitude(ml_rad: float, p1: float, p2: float) -> float:
    """Eccentric longitude F with F + p1 cos F - p2 sin F = ml.

    Newton iteration from F = ml with the step clipped to 0.5 rad,
    falling back to bisection on the (monotone) residual if Newton
    stalls.  Residual tolerance 1e-13 rad.
    """
    if p1 * p1 + p2 * p2 >= 1.0:
        raise DomainError("eccentricity must be below 1")
    f = ml_rad
    for _ in range(60):
        resid = f + p1 * math.cos(f) - p2 * math.sin(f) - ml_rad
        if abs(resid) < 1e-13:
            return f
        slope = 1.0 - p1 * math.sin(f) - p2 * math.cos(f)
        step = -resid / slope
        if step > 0.5:
            step = 0.5
        elif step < -0.5:
            step = -0.5
        f += step
    # residual is strictly increasing in F, so this bracket always holds
    lo, hi = ml_rad - 2.0, ml_rad + 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        resid = mid + p1 * math.cos(mid) - p2 * math.sin(mid) - ml_rad
        if abs(resid) < 1e-13:
            return mid
        if resid > 0.0:
            hi = mid
        else:
            lo = mid
    raise ConvergenceError(
        f"eccentric-longitude solve failed for ml={ml_rad}, p1={p1}, p2={p2}")


def equinoctial_to_cartesian(el: EquinoctialElements, mu: float = GM_SUN) -> StateVector:
    """Cartesian state of an equinoctial element set (direct construction)."""
    if mu <= 0.0:
        raise DomainError("mu must be positive")
    lam = math.radians(el.ml_deg)
    f = solve_eccentric_longitude(lam, el.p1, el.p2)
    h, k = el.p1, el.p2
    p, q = el.q1, el.q2
    a = el.a
    sf, cf = math.sin(f), math.cos(f)
    beta = 1.0 / (1.0 + math.sqrt(1.0 - h * h - k * k))
    n = math.sqrt(mu / a ** 3)
    r = a * (1.0 - k * cf - h * sf)
    x1 = a * ((1.0 - h * h * beta) * cf + h * k * beta * sf - k)
    y1 = a * ((1.0 - k * k * beta) * sf + h * k * beta * cf - h)
    x1d = n * a ** 2 / r * (h * k * beta * cf - (1.0 - h * h * beta) * sf)
    y1d = n * a ** 2 / r * ((1.0 - k * k * beta) * cf - h * k * beta * sf)
    den = 1.0 + p * p + q * q
    fv = np.array([1.0 - p * p + q * q, 2.0 * p * q, -2.0 * p]) / den
    gv = np.array([2.0 * p * q, 1.0 + p * p - q * q, 2.0 * q]) / den
    return StateVector(x1 * fv + y1 * gv, x1d * fv + y1d * gv, el.epoch)


def cartesian_to_equinoctial(s: StateVector, mu: float = GM_SUN) -> EquinoctialElements:
    """Inverse of equinoctial_to_cartesian (elliptic orbits only)."""
    if mu <= 0.0:
        raise DomainError("mu must be positive")
    r = s.r
    v = s.v
    rn = float(np.linalg.norm(r))
    if rn == 0.0:
        raise DomainError("position must be nonzero")
    energy = 0.5 * float(np.dot(v, v)) - mu / rn
    if energy >= 0.0:
        raise DomainError("state is not elliptic (specific energy >= 0)")
    hvec = np.cross(r, v)
    hn = float(np.linalg.norm(hvec))
    if hn == 0.0:
        raise DomainError("rectilinear orbit has no equinoctial representation")
    a = -mu / (2.0 * energy)
    hh = hvec / hn
    if hh[2] <= -1.0 + 1e-12:
        raise DomainError("retrograde-equatorial orbit not supported")
    q1 = hh[0] / (1.0 + hh[2])
    q2 = -hh[1] / (1.0 + hh[2])
    den = 1.0 + q1 * q1 + q2 * q2
    fv = np.array([1.0 - q1 * q1 + q2 * q2, 2.0 * q1 * q2, -2.0 * q1]) / den
    gv = np.array([2.0 * q1 * q2, 1.0 + q1 * q1 - q2 * q2, 2.0 * q2]) / den
    evec = np.cross(v, hvec) / mu - r / rn
    p1 = float(np.dot(evec, gv))
    p2 = float(np.dot(evec, fv))
    # eccentric longitude from the in-plane coordinates
    x1 = float(np.dot(r, fv))
    y1 = float(np.dot(r, gv))
    beta = 1.0 / (1.0 + math.sqrt(max(1.0 - p1 * p1 - p2 * p2, 0.0)))
    m11 = 1.0 - p1 * p1 * beta
    m12 = p1 * p2 * beta
    m22 = 1.0 - p2 * p2 * beta
    det = m11 * m22 - m12 * m12
    cf = (m22 * (x1 / a + p2) - m12 * (y1 / a + p1)) / det
    sf = (m11 * (y1 / a + p1) - m12 * (x1 / a + p2)) / det
    f = math.atan2(sf, cf)
    lam = f + p1 * math.cos(f) - p2 * math.sin(f)
    ml_deg = math.degrees(lam) % 360.0
    return EquinoctialElements(a, p1, p2, q1, q2, ml_deg, s.epoch)


def ecliptic_drift_rotation(epoch: Epoch) -> np.ndarray:
    """Rotation taking mean-ecliptic-of-date vectors at `epoch` to J2000 ecliptic.

    The mean ecliptic pole drifts slowly; the drift through date T is a
    small tilt eta about an axis in the J2000 ecliptic plane.  Standard
    precession series for the tilt components (arcsec per Julian
    century):  s = 4.199094 T + 0.1939873 T^2,
               c = -46.811015 T + 0.0510283 T^2.
    """
    t_cy = (epoch.mjd_tdb + MJD_JD_OFFSET - JD_J2000) / 36525.0
    s_arc = 4.199094 * t_cy + 0.1939873 * t_cy * t_cy
    c_arc = -46.811015 * t_cy + 0.0510283 * t_cy * t_cy
    node = math.atan2(s_arc, c_arc)
    eta = math.radians(math.hypot(s_arc, c_arc) / 3600.0)
    axis = np.array([math.cos(node), math.sin(node), 0.0])
    c, s = math.cos(eta), math.sin(eta)
    ux, uy, uz = axis
    k = 1.0 - c
    return np.array([
        [c + ux * ux * k, ux * uy * k - uz * s, ux * uz * k + uy * s],
        [uy * ux * k + uz * s, c + uy * uy * k, uy * uz * k - ux * s],
        [uz * ux * k - uy * s, uz * uy * k + ux * s, c + uz * uz * k],
    ])


def state_from_elements(el: EquinoctialElements, mu: float = GM_SUN,
                        frame: str = FRAME_OF_DATE,
                        convention: str = CONVENTION_STANDARD) -> StateVector:
    """Read an element set into a J2000-ecliptic Cartesian state.

    `frame` says which ecliptic plane the element angles refer to;
    `convention` selects the standard or swapped (p1,p2)/(q1,q2)
    ordering.
    """
    if convention == CONVENTION_SWAPPED:
        el = replace(el, p1=el.p2, p2=el.p1, q1=el.q2, q2=el.q1)
    elif convention != CONVENTION_STANDARD:
        raise DomainError(f"unknown element convention: {convention!r}")
    s = equinoctial_to_cartesian(el, mu)
    if frame == FRAME_J2000:
        return s
    if frame != FRAME_OF_DATE:
        raise DomainError(f"unknown element frame: {frame!r}")
    rot = ecliptic_drift_rotation(el.epoch)
    return StateVector(rot @ s.r, rot @ s.v, s.epoch)


__all__ = [
    "AU",
    "CONVENTION_STANDARD",
    "CONVENTION_SWAPPED",
    "EquinoctialElements",
    "FRAME_J2000",
    "FRAME_OF_DATE",
    "StateVector",
    "cartesian_to_equinoctial",
    "ecliptic_drift_rotation",
    "equinoctial_to_cartesian",
    "solve_eccentric_longitude",
    "state_from_elements",
]
