"""Slow-push deflection sweeps.

A station-keeping spacecraft directs an ion beam at the asteroid,
adding a small continuous acceleration along (or against) the
velocity.  Sweeping the push duration maps out how far the impact
point walks along the ground track.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .constants import AU, MONTH_DAYS
from .dynamics import (
    DEFAULT_INTEGRATOR,
    ForceModelConfig,
    IntegratorConfig,
)
from .elements import (
    CONVENTION_STANDARD,
    FRAME_OF_DATE,
    EquinoctialElements,
    StateVector,
)
from .errors import DomainError
from .impact import ImpactRecord, great_circle_km, impact_from_elements
from .timeframes import Epoch

__all__ = [
    "AsteroidBody",
    "DeflectionEntry",
    "DeflectionTrack",
    "ThrustLaw",
    "deflection_sweep",
    "displacement_vs_duration",
    "initial_bearing_deg",
    "thrust_acceleration",
]


@dataclass(frozen=True)
class AsteroidBody:
    """Spherical target body; mass follows from diameter and density."""

    diameter_m: float
    density_kgm3: float

    def __post_init__(self):
        if not 50.0 <= self.diameter_m <= 1000.0:
            raise DomainError("diameter outside the 50-1000 m envelope")
        if self.density_kgm3 <= 0.0:
            raise DomainError("density must be positive")

    @property
    def mass_kg(self) -> float:
        return self.density_kgm3 * math.pi / 6.0 * self.diameter_m ** 3


@dataclass(frozen=True)
class ThrustLaw:
    """Along-track push: force f0 at 1 au, scaled by (1 au / r)^exponent.

    The distance scaling models the solar-array power available to the
    thruster.  sign = +1 pushes along the velocity, -1 against it.
    """

    f0_N: float
    exponent: float = 1.7
    sign: int = 1
    start: Epoch = Epoch(58788.0)
    duration_days: float = 0.0

    def __post_init__(self):
        if self.f0_N < 0.0:
            raise DomainError("thrust magnitude must be non-negative")
        if not 1.0 <= self.exponent <= 2.0:
            raise DomainError("distance exponent outside [1, 2]")
        if self.sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")
        if self.duration_days < 0.0:
            raise DomainError("duration must be non-negative")

    @property
    def end(self) -> Epoch:
        return self.start.plus_days(self.duration_days)


def thrust_acceleration(s: StateVector, law: ThrustLaw,
                        body: AsteroidBody) -> np.ndarray:
    """Acceleration imparted on the asteroid at state s, m/s^2."""
    if not law.start.mjd_tdb <= s.epoch.mjd_tdb < law.end.mjd_tdb:
        return np.zeros(3)
    r = float(np.linalg.norm(s.r))
    if r <= 0.0:
        raise DomainError("state at the origin")
    v = float(np.linalg.norm(s.v))
    if v <= 0.0:
        raise DomainError("thrust direction undefined at zero velocity")
    mag = law.f0_N / body.mass_kg * (AU / r) ** law.exponent
    return law.sign * mag * s.v / v


@dataclass(frozen=True)
class DeflectionEntry:
    months: float
    record: ImpactRecord
    displacement_km: float
    bearing_deg: float


@dataclass(frozen=True)
class DeflectionTrack:
    """Impact-point walk for a family of push durations."""

    undeflected: ImpactRecord
    entries: tuple

    def __post_init__(self):
        months = [e.months for e in self.entries]
        if any(b <= a for a, b in zip(months, months[1:])):
            raise DomainError("push durations must be strictly increasing")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("months,lat,lon,displacement_km,bearing_deg,"
                     "impact_epoch_mjd_utc\n")
            base = self.undeflected
            fh.write("%.10g,%.6f,%.6f,%.6f,%.4f,%.8f\n" % (
                0.0, base.point.lat_deg, base.point.lon_deg, 0.0, 0.0,
                base.epoch_utc.mjd_tdb))
            for e in self.entries:
                fh.write("%.10g,%.6f,%.6f,%.6f,%.4f,%.8f\n" % (
                    e.months, e.record.point.lat_deg, e.record.point.lon_deg,
                    e.displacement_km, e.bearing_deg, e.record.epoch_utc.mjd_tdb))

    def to_geojson(self, path) -> None:
        import json
        coords = [[round(self.undeflected.point.lon_deg, 6),
                   round(self.undeflected.point.lat_deg, 6)]]
        feats = [{
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": coords[0]},
            "properties": {"months": 0.0, "displacement_km": 0.0},
        }]
        for e in self.entries:
            pt = [round(e.record.point.lon_deg, 6),
                  round(e.record.point.lat_deg, 6)]
            coords.append(pt)
            feats.append({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": pt},
                "properties": {
                    "months": e.months,
                    "displacement_km": round(e.displacement_km, 6),
                    "bearing_deg": round(e.bearing_deg, 4),
                },
            })
        if len(coords) >= 2:
            feats.insert(0, {
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": {"kind": "deflection-track"},
            })
        obj = {"type": "FeatureCollection", "features": feats}
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(obj, fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")


def initial_bearing_deg(lat1: float, lon1: float,
                        lat2: float, lon2: float) -> float:
    """Great-circle initial bearing from point 1 to point 2, degrees."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    y = math.sin(dl) * math.cos(p2)
    x = math.cos(p1) * math.sin(p2) - math.sin(p1) * math.cos(p2) * math.cos(dl)
    return (math.degrees(math.atan2(y, x)) + 360.0) % 360.0


def deflection_sweep(el: EquinoctialElements, body: AsteroidBody,
                     law_template: ThrustLaw,
                     months_list: Sequence[float],
                     fcfg: ForceModelConfig = ForceModelConfig(),
                     icfg: IntegratorConfig = DEFAULT_INTEGRATOR,
                     element_frame: str = FRAME_OF_DATE,
                     convention: str = CONVENTION_STANDARD,
                     horizon_days: float = 3000.0,
                     max_workers: Optional[int] = None) -> DeflectionTrack:
    """Impact points for push durations of `months_list` months each.

    The undeflected baseline is always computed; every deflected case
    must still impact (the push nudges the impact point along the
    ground track, it does not avert the impact for these durations).
    """
    months = [float(m) for m in months_list]
    if not months:
        raise DomainError("need at least one push duration")
    if any(m <= 0.0 for m in months):
        raise DomainError("push durations must be positive")
    if any(b <= a for a, b in zip(months, months[1:])):
        raise DomainError("push durations must be strictly increasing")
    if fcfg.thrust is not None:
        raise DomainError("force model already carries a thrust; "
                          "the sweep sets its own")

    def run(m: Optional[float]):
        if m is None:
            cfg = fcfg
        else:
            law = replace(law_template, duration_days=m * MONTH_DAYS)
            cfg = replace(fcfg, thrust=law, asteroid=body)
        return impact_from_elements(el, cfg, icfg, element_frame, convention,
                                    horizon_days)

    results = ordered_map(run, [None] + months, max_workers)
    base = results[0]
    if not isinstance(base, ImpactRecord):
        raise DomainError("undeflected trajectory does not impact")
    entries = []
    for m, rec in zip(months, results[1:]):
        if not isinstance(rec, ImpactRecord):
            raise DomainError(f"{m}-month push removes the impact entirely; "
                              "outside the slow-push regime studied here")
        d = great_circle_km(base.point.lat_deg, base.point.lon_deg,
                            rec.point.lat_deg, rec.point.lon_deg)
        b = initial_bearing_deg(base.point.lat_deg, base.point.lon_deg,
                                rec.point.lat_deg, rec.point.lon_deg)
        entries.append(DeflectionEntry(m, rec, d, b))
    return DeflectionTrack(base, tuple(entries))


def displacement_vs_duration(track: DeflectionTrack):
    """(months, displacement_km, bearing_deg, direction) summary arrays.

    direction is "west" when the displacement-weighted mean bearing
    points into the western half plane, "east" otherwise.
    """
    months = np.array([e.months for e in track.entries])
    disp = np.array([e.displacement_km for e in track.entries])
    bear = np.array([e.bearing_deg for e in track.entries])
    if disp.sum() > 0.0:
        west = float(np.sum(disp * np.sin(np.radians(bear)))) < 0.0
    else:
        west = False
    return months, disp, bear, ("west" if west else "east")
