"""Consequence scoring on population and nightlight rasters.

Damage around an impact point is summarized by integrating a raster
over the 100 km radius of action: persons for the population-density
grid, intensity-times-area for the nightlight image.  Two ratios
compare a deflected impact point against the undeflected one:

  hci = population(deflected) / population(undeflected)
  idi = light(deflected) / light(undeflected)

idi is reported as not-applicable (None) when the undeflected light
integral is zero; that state is never coerced to a number.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .constants import R_MEAN_KM
from .deflection import DeflectionTrack
from .errors import CoverageError, DomainError, FormatError
from .timeframes import GeodeticPoint

__all__ = [
    "DamageIndexes",
    "DamageSeries",
    "GeoRaster",
    "KIND_NIGHTLIGHT",
    "KIND_POPULATION",
    "damage_indexes",
    "disc_integral",
    "load_nightlight",
    "load_population_grid",
    "score_track",
]

KIND_POPULATION = "population-density"
KIND_NIGHTLIGHT = "nightlight"

_DEG = math.pi / 180.0


@dataclass(frozen=True)
class GeoRaster:
    """North-up georeferenced grid; row 0 is the northernmost."""

    n_lon: int
    n_lat: int
    lon0: float                    # upper-left cell edge, deg
    lat0: float
    cell_deg: float
    nodata: Optional[float]
    values: np.ndarray             # shape (n_lat, n_lon)
    kind: str
    _disc_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.cell_deg <= 0.0:
            raise DomainError("cell size must be positive")
        if self.n_lon < 1 or self.n_lat < 1:
            raise DomainError("empty raster")
        if self.n_lon * self.cell_deg > 360.0 + 1e-9 or \
                self.n_lat * self.cell_deg > 180.0 + 1e-9:
            raise DomainError("raster larger than the globe")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.n_lat, self.n_lon):
            raise DomainError("values shape does not match cell counts")
        if self.kind not in (KIND_POPULATION, KIND_NIGHTLIGHT):
            raise DomainError(f"unknown raster kind {self.kind!r}")
        if self.kind == KIND_NIGHTLIGHT:
            if not np.all((v >= 0) & (v <= 100) & (v == np.round(v))):
                raise DomainError("nightlight values must be integers in [0, 100]")
        object.__setattr__(self, "values", v)

    @property
    def lon_span_deg(self) -> float:
        return self.n_lon * self.cell_deg

    @property
    def is_global_lon(self) -> bool:
        return abs(self.lon_span_deg - 360.0) < 1e-9

    def lat_centers(self) -> np.ndarray:
        return self.lat0 - (np.arange(self.n_lat) + 0.5) * self.cell_deg

    def lon_centers(self) -> np.ndarray:
        return self.lon0 + (np.arange(self.n_lon) + 0.5) * self.cell_deg

    def scaled(self, k: float) -> "GeoRaster":
        """Copy with every valid value multiplied by k (kind dropped to
        population semantics when scaling breaks the nightlight range)."""
        v = self.values.copy()
        if self.nodata is not None:
            mask = v != self.nodata
            v[mask] = v[mask] * k
        else:
            v = v * k
        kind = self.kind
        if kind == KIND_NIGHTLIGHT and (k < 0 or k != round(k) or v.max() > 100):
            kind = KIND_POPULATION
        return GeoRaster(self.n_lon, self.n_lat, self.lon0, self.lat0,
                         self.cell_deg, self.nodata, v, kind)


def _header_error(path, lineno: int, msg: str) -> FormatError:
    return FormatError(f"{path}:{lineno}: {msg}")


def load_population_grid(path) -> GeoRaster:
    """Read an ESRI ASCII grid of population density (persons/km^2)."""
    keys = {}
    data = []
    header_order = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize")
    with open(path, "r", encoding="utf-8") as fh:
        lineno = 0
        in_header = True
        for raw in fh:
            lineno += 1
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if in_header and not _is_number(parts[0]):
                if len(parts) != 2:
                    raise _header_error(path, lineno, "malformed header line")
                key = parts[0].lower()
                if key not in header_order + ("nodata_value",):
                    raise _header_error(path, lineno, f"unknown header key {parts[0]!r}")
                if key in keys:
                    raise _header_error(path, lineno, f"duplicate header key {parts[0]!r}")
                try:
                    keys[key] = float(parts[1])
                except ValueError:
                    raise _header_error(path, lineno, f"bad header value {parts[1]!r}")
                continue
            in_header = False
            for tok in parts:
                try:
                    data.append(float(tok))
                except ValueError:
                    raise _header_error(
                        path, lineno,
                        f"bad cell value {tok!r} at position {len(data)}")
    for key in header_order:
        if key not in keys:
            raise FormatError(f"{path}: missing header key {key!r}")
    n_lon = int(keys["ncols"])
    n_lat = int(keys["nrows"])
    if n_lon != keys["ncols"] or n_lat != keys["nrows"] or n_lon < 1 or n_lat < 1:
        raise FormatError(f"{path}: ncols/nrows must be positive integers")
    cell = keys["cellsize"]
    if cell <= 0:
        raise FormatError(f"{path}: cellsize must be positive")
    if len(data) != n_lon * n_lat:
        raise FormatError(
            f"{path}: expected {n_lon * n_lat} cell values, got {len(data)}")
    nodata = keys.get("nodata_value", -9999.0)
    values = np.array(data).reshape(n_lat, n_lon)
    lat0 = keys["yllcorner"] + n_lat * cell
    return GeoRaster(n_lon, n_lat, keys["xllcorner"], lat0, cell,
                     nodata, values, KIND_POPULATION)


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def load_nightlight(path) -> GeoRaster:
    """Read a full-globe equirectangular PGM (P2 or P5) nightlight image.

    8-bit gray values are requantized to integers 0-100.  The image
    must be twice as wide as tall (one cell per equal angle step) with
    longitude -180 at the left edge and latitude +90 at the top.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:2] not in (b"P2", b"P5"):
        raise FormatError(f"{path}: not a PGM file (magic {blob[:2]!r})")
    magic = blob[:2].decode()

    # header = magic, width, height, maxval as whitespace-separated
    # tokens, with '#' comments running to end of line
    tokens = []
    pos = 2
    while len(tokens) < 3 and pos < len(blob):
        ch = blob[pos:pos + 1]
        if ch == b"#":
            nl = blob.find(b"\n", pos)
            pos = len(blob) if nl < 0 else nl + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(blob) and not blob[end:end + 1].isspace() \
                    and blob[end:end + 1] != b"#":
                end += 1
            tokens.append(blob[pos:end])
            pos = end
    if len(tokens) < 3:
        raise FormatError(f"{path}: truncated PGM header")
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"{path}: non-integer PGM header fields")
    if width < 1 or height < 1:
        raise FormatError(f"{path}: empty image")
    if maxval != 255:
        raise FormatError(f"{path}: need 8-bit PGM (maxval 255, got {maxval})")
    if width != 2 * height:
        raise FormatError(
            f"{path}: {width}x{height} is not the 2:1 equirectangular shape")

    if magic == "P5":
        pos += 1                   # single whitespace byte after maxval
        raster = blob[pos:pos + width * height]
        if len(raster) != width * height:
            raise FormatError(f"{path}: expected {width * height} pixel bytes, "
                              f"got {len(raster)}")
        raw = np.frombuffer(raster, dtype=np.uint8).astype(float)
    else:
        body = blob[pos:].decode("ascii", errors="strict")
        body = re.sub(r"#[^\n]*", " ", body)
        vals = body.split()
        if len(vals) != width * height:
            raise FormatError(f"{path}: expected {width * height} pixel values, "
                              f"got {len(vals)}")
        raw = np.array([float(v) for v in vals])
        if np.any(raw != np.round(raw)) or raw.min() < 0 or raw.max() > 255:
            raise FormatError(f"{path}: pixel values outside 0..255")
    values = np.round(raw * 100.0 / 255.0).reshape(height, width)
    cell = 360.0 / width
    return GeoRaster(width, height, -180.0, 90.0, cell, None, values,
                     KIND_NIGHTLIGHT)


def _center_in_extent(raster: GeoRaster, center: GeodeticPoint) -> None:
    lat_lo = raster.lat0 - raster.n_lat * raster.cell_deg
    if not lat_lo - 1e-9 <= center.lat_deg <= raster.lat0 + 1e-9:
        raise CoverageError(
            f"center latitude {center.lat_deg:.4f} outside raster rows")
    rel = (center.lon_deg - raster.lon0) % 360.0
    if rel > raster.lon_span_deg + 1e-9:
        raise CoverageError(
            f"center longitude {center.lon_deg:.4f} outside raster columns")


def disc_integral(raster: GeoRaster, center: GeodeticPoint,
                  radius_km: float):
    """Integral of the raster over a spherical disc, and the disc area.

    A cell belongs to the disc when its center is within the
    great-circle radius (no partial-cell clipping).  Absent (nodata)
    cells contribute to neither the integral nor the area.  Returns
    (integral, area_km2); population rasters yield persons, nightlight
    rasters intensity*km^2.
    """
    if not 0.0 < radius_km <= 2000.0:
        raise DomainError("radius must be in (0, 2000] km")
    _center_in_extent(raster, center)
    key = (round(center.lat_deg, 9), round(center.lon_deg, 9), radius_km)
    hit = raster._disc_cache.get(key)
    if hit is not None:
        return hit

    theta = radius_km / R_MEAN_KM
    cos_theta = math.cos(theta)
    phi_c = math.radians(center.lat_deg)
    sin_pc, cos_pc = math.sin(phi_c), math.cos(phi_c)
    lat_c = raster.lat_centers()
    lon_c = raster.lon_centers()
    # candidate rows: along-meridian distance alone already rules the
    # rest out
    rows = np.nonzero(np.abs(lat_c - center.lat_deg) <= math.degrees(theta))[0]
    cos_dlam = np.cos(_DEG * (lon_c - center.lon_deg))
    cell_area_unit = (_DEG * raster.cell_deg) ** 2 * R_MEAN_KM ** 2

    integral = 0.0
    area = 0.0
    vals = raster.values
    for i in rows:
        phi = _DEG * lat_c[i]
        cos_d = math.sin(phi) * sin_pc + math.cos(phi) * cos_pc * cos_dlam
        inside = cos_d >= cos_theta
        if raster.nodata is not None:
            inside = inside & (vals[i] != raster.nodata)
        if not inside.any():
            continue
        cell_area = cell_area_unit * math.cos(phi)
        integral += float(vals[i][inside].sum()) * cell_area
        area += float(inside.sum()) * cell_area
    out = (integral, area)
    raster._disc_cache[key] = out
    return out


@dataclass(frozen=True)
class DamageIndexes:
    """Damage at a deflected point relative to the undeflected one."""

    hci: float
    idi: Optional[float]
    population: float
    light_integral: float

    def __post_init__(self):
        if self.hci < 0.0 or self.population < 0.0 or self.light_integral < 0.0:
            raise DomainError("damage indexes must be non-negative")
        if self.idi is not None and self.idi < 0.0:
            raise DomainError("damage indexes must be non-negative")


def damage_indexes(pop: GeoRaster, light: GeoRaster,
                   deflected: GeodeticPoint, undeflected: GeodeticPoint,
                   radius_km: float = 100.0) -> DamageIndexes:
    """hci and idi ratios for one deflected impact point.

    The undeflected integrals are cached on the rasters, so scoring a
    whole track evaluates them once.
    """
    p0, _ = disc_integral(pop, undeflected, radius_km)
    l0, _ = disc_integral(light, undeflected, radius_km)
    p, _ = disc_integral(pop, deflected, radius_km)
    li, _ = disc_integral(light, deflected, radius_km)
    if p0 <= 0.0:
        raise DomainError("undeflected population integral is zero; "
                          "hci undefined")
    idi = None if l0 <= 0.0 else li / l0
    return DamageIndexes(p / p0, idi, p, li)


@dataclass(frozen=True)
class DamageSeries:
    """Per-duration damage rows for a deflection track."""

    undeflected: GeodeticPoint
    baseline_population: float
    baseline_light: float
    rows: tuple                    # (months, GeodeticPoint, DamageIndexes)
    best_months: float

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("months,lat,lon,hci,idi,population,light_integral\n")
            base_idi = "NA" if self.baseline_light <= 0.0 else "1"
            fh.write("0,%.6f,%.6f,1,%s,%.10g,%.10g\n" % (
                self.undeflected.lat_deg, self.undeflected.lon_deg, base_idi,
                self.baseline_population, self.baseline_light))
            for months, pt, d in self.rows:
                idi = "NA" if d.idi is None else "%.10g" % d.idi
                fh.write("%.10g,%.6f,%.6f,%.10g,%s,%.10g,%.10g\n" % (
                    months, pt.lat_deg, pt.lon_deg, d.hci, idi,
                    d.population, d.light_integral))


def score_track(track: DeflectionTrack, pop: GeoRaster, light: GeoRaster,
                radius_km: float = 100.0,
                max_workers: Optional[int] = None) -> DamageSeries:
    """Damage indexes per push duration, flagging the best duration.

    Best = smallest exposed population, ties broken by smaller idi
    (not-applicable sorting last), then by shorter push.
    """
    if not track.entries:
        raise DomainError("track has no deflected entries to score")
    base_pt = track.undeflected.point
    p0, _ = disc_integral(pop, base_pt, radius_km)
    l0, _ = disc_integral(light, base_pt, radius_km)

    def score(entry):
        return damage_indexes(pop, light, entry.record.point, base_pt,
                              radius_km)

    scored = ordered_map(score, track.entries, max_workers)
    rows = tuple((e.months, e.record.point, d)
                 for e, d in zip(track.entries, scored))
    best = min(rows, key=lambda r: (
        r[2].population,
        math.inf if r[2].idi is None else r[2].idi,
        r[0]))
    return DamageSeries(base_pt, p0, l0, rows, best[0])
