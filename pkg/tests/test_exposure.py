"""Raster loading, spherical disc integration, and damage indexes."""

import math

import numpy as np
import pytest

from slowpush import (
    DamageIndexes,
    DeflectionEntry,
    DeflectionTrack,
    Epoch,
    GeodeticPoint,
    GeoRaster,
    ImpactRecord,
    StateVector,
    damage_indexes,
    disc_integral,
    load_nightlight,
    load_population_grid,
    score_track,
)
from slowpush.constants import AU, R_MEAN_KM
from slowpush.errors import CoverageError, DomainError, FormatError
from slowpush.exposure import KIND_NIGHTLIGHT, KIND_POPULATION

from helpers import write_nightlight_pgm, write_population_asc


def _uniform_global(cell=0.5, value=100.0, kind=KIND_POPULATION):
    n_lon = int(round(360.0 / cell))
    n_lat = int(round(180.0 / cell))
    vals = np.full((n_lat, n_lon), value)
    return GeoRaster(n_lon, n_lat, -180.0, 90.0, cell, None, vals, kind)


def _pt(lat, lon):
    return GeodeticPoint(lat, lon, 0.0)


class TestPopulationLoader:
    def test_roundtrip(self, tmp_path):
        p = tmp_path / "pop.asc"
        write_population_asc(p, lat_center=28.0, lon_center=77.0)
        r = load_population_grid(p)
        assert r.kind == KIND_POPULATION
        assert r.cell_deg == 0.25
        assert r.n_lon == r.n_lat == 160
        assert r.lon0 == pytest.approx(57.0)
        assert r.lat0 == pytest.approx(48.0)
        assert r.values.shape == (160, 160)

    def test_header_typo(self, tmp_path):
        p = tmp_path / "pop.asc"
        p.write_text("ncols 4\nnrows 2\nxllcenter 0\nyllcorner 0\n"
                     "cellsize 1\n" + "1 2 3 4\n" * 2)
        with pytest.raises(FormatError, match=":3:"):
            load_population_grid(p)

    def test_bad_value(self, tmp_path):
        p = tmp_path / "pop.asc"
        p.write_text("ncols 4\nnrows 2\nxllcorner 0\nyllcorner 0\n"
                     "cellsize 1\n1 2 3 4\n1 two 3 4\n")
        with pytest.raises(FormatError, match=":7:"):
            load_population_grid(p)

    def test_wrong_cell_count(self, tmp_path):
        p = tmp_path / "pop.asc"
        p.write_text("ncols 4\nnrows 2\nxllcorner 0\nyllcorner 0\n"
                     "cellsize 1\n1 2 3 4\n1 2 3\n")
        with pytest.raises(FormatError):
            load_population_grid(p)

    def test_nodata_honored(self, tmp_path):
        p = tmp_path / "pop.asc"
        p.write_text("ncols 2\nnrows 2\nxllcorner 10\nyllcorner 10\n"
                     "cellsize 1\nnodata_value -1\n5 -1\n5 5\n")
        r = load_population_grid(p)
        assert r.nodata == -1.0
        integral, area = disc_integral(r, _pt(11.0, 11.0), 500.0)
        _, full = disc_integral(_uniform_global(cell=1.0), _pt(11.0, 11.0),
                                500.0)
        assert area < full
        assert integral == pytest.approx(5.0 * area, rel=1e-12)


class TestNightlightLoader:
    def test_binary_roundtrip(self, tmp_path):
        p = tmp_path / "light.pgm"
        write_nightlight_pgm(p, width=720, height=360)
        r = load_nightlight(p)
        assert r.kind == KIND_NIGHTLIGHT
        assert (r.n_lon, r.n_lat) == (720, 360)
        assert r.lon0 == -180.0 and r.lat0 == 90.0
        assert r.cell_deg == 0.5
        assert r.values.min() >= 0 and r.values.max() <= 100

    def test_ascii_variant(self, tmp_path):
        p = tmp_path / "light.pgm"
        p.write_text("P2\n# synthetic\n4 2\n255\n0 51 102 153\n204 255 0 51\n")
        r = load_nightlight(p)
        assert r.values[0, 1] == 20.0    # 51/255 scaled to percent
        assert r.values[1, 1] == 100.0

    def test_rejects_wrong_maxval(self, tmp_path):
        p = tmp_path / "light.pgm"
        p.write_text("P2\n4 2\n65535\n0 1 2 3\n4 5 6 7\n")
        with pytest.raises(FormatError):
            load_nightlight(p)

    def test_rejects_non_global_aspect(self, tmp_path):
        p = tmp_path / "light.pgm"
        p.write_text("P2\n5 2\n255\n0 1 2 3 4\n5 6 7 8 9\n")
        with pytest.raises(FormatError):
            load_nightlight(p)


class TestDiscIntegral:
    def test_uniform_matches_area_formula(self):
        r = _uniform_global(cell=0.1)
        integral, area = disc_integral(r, _pt(40.0, 60.0), 300.0)
        want = math.pi * 300.0 ** 2 * 100.0
        assert abs(integral - want) / want < 0.02
        assert integral == pytest.approx(100.0 * area, rel=1e-12)

    def test_polar_cap(self):
        # cell-center membership quantizes hardest at the pole, so the
        # disc must span enough rows for a tight area check
        r = _uniform_global(cell=0.25)
        integral, area = disc_integral(r, _pt(90.0, 0.0), 1500.0)
        theta = 1500.0 / R_MEAN_KM
        cap = 2.0 * math.pi * R_MEAN_KM ** 2 * (1.0 - math.cos(theta))
        assert abs(area - cap) / cap < 0.005
        assert integral == pytest.approx(100.0 * area, rel=1e-12)

    def test_scaling_ratio_exact(self):
        r = _uniform_global(cell=0.5)
        r3 = r.scaled(3.0)
        i1, a1 = disc_integral(r, _pt(-20.0, 120.0), 400.0)
        i3, a3 = disc_integral(r3, _pt(-20.0, 120.0), 400.0)
        assert i3 == 3.0 * i1
        assert a3 == a1

    def test_antimeridian_shift_equivariance(self):
        cell = 0.5
        rng = np.random.default_rng(11)
        vals = rng.uniform(0.0, 50.0, size=(360, 720))
        a = GeoRaster(720, 360, -180.0, 90.0, cell, None, vals,
                      KIND_POPULATION)
        k = 360                       # half a turn
        b = GeoRaster(720, 360, -180.0 + k * cell, 90.0, cell, None,
                      np.roll(vals, -k, axis=1), KIND_POPULATION)
        for lat, lon in ((10.0, 179.8), (-5.0, -179.9), (0.0, 180.0)):
            ia, _ = disc_integral(a, _pt(lat, lon), 350.0)
            ib, _ = disc_integral(b, _pt(lat, lon), 350.0)
            assert abs(ia - ib) <= 1e-9 * max(ia, 1.0)

    def test_additivity(self):
        cell = 0.5
        rng = np.random.default_rng(3)
        va = rng.uniform(0.0, 10.0, size=(360, 720))
        vb = rng.uniform(0.0, 10.0, size=(360, 720))
        ra = GeoRaster(720, 360, -180.0, 90.0, cell, None, va, KIND_POPULATION)
        rb = GeoRaster(720, 360, -180.0, 90.0, cell, None, vb, KIND_POPULATION)
        rc = GeoRaster(720, 360, -180.0, 90.0, cell, None, va + vb,
                       KIND_POPULATION)
        ia, _ = disc_integral(ra, _pt(33.0, -50.0), 250.0)
        ib, _ = disc_integral(rb, _pt(33.0, -50.0), 250.0)
        ic, _ = disc_integral(rc, _pt(33.0, -50.0), 250.0)
        assert ic == pytest.approx(ia + ib, rel=1e-12)

    def test_radius_bounds(self):
        r = _uniform_global()
        with pytest.raises(DomainError):
            disc_integral(r, _pt(0.0, 0.0), 0.0)
        with pytest.raises(DomainError):
            disc_integral(r, _pt(0.0, 0.0), 2000.1)

    def test_out_of_extent(self, tmp_path):
        p = tmp_path / "pop.asc"
        write_population_asc(p, lat_center=28.0, lon_center=77.0, half_deg=10)
        r = load_population_grid(p)
        with pytest.raises(CoverageError):
            disc_integral(r, _pt(28.0, 120.0), 100.0)
        with pytest.raises(CoverageError):
            disc_integral(r, _pt(60.0, 77.0), 100.0)

    def test_cache_hits(self):
        r = _uniform_global(cell=1.0)
        out1 = disc_integral(r, _pt(12.0, 34.0), 200.0)
        assert len(r._disc_cache) == 1
        out2 = disc_integral(r, _pt(12.0, 34.0), 200.0)
        assert out1 is out2


class TestDamageIndexes:
    def _rasters(self):
        pop = _uniform_global(cell=0.5, value=50.0)
        vals = np.full((360, 720), 40.0)
        vals[:180, :] = 0.0          # dark northern hemisphere
        light = GeoRaster(720, 360, -180.0, 90.0, 0.5, None, vals,
                          KIND_NIGHTLIGHT)
        return pop, light

    def test_identity_when_undeflected(self):
        pop, light = self._rasters()
        d = damage_indexes(pop, light, _pt(-30.0, 10.0), _pt(-30.0, 10.0))
        assert d.hci == 1.0
        assert d.idi == 1.0

    def test_dark_baseline_gives_no_idi(self):
        # disc wide enough that cell quantization stays small against
        # the uniform-density expectation hci = 1
        pop, light = self._rasters()
        d = damage_indexes(pop, light, _pt(-30.0, 10.0), _pt(40.0, 10.0),
                           radius_km=300.0)
        assert d.idi is None
        assert d.hci == pytest.approx(1.0, abs=0.02)

    def test_zero_population_baseline_rejected(self):
        pop, light = self._rasters()
        zero = pop.scaled(0.0)
        with pytest.raises(DomainError):
            damage_indexes(zero, light, _pt(0.0, 0.0), _pt(10.0, 10.0))

    def test_negative_index_rejected(self):
        with pytest.raises(DomainError):
            DamageIndexes(hci=-0.1, idi=None, population=0.0,
                          light_integral=0.0)


def _impact_record(lat, lon, mjd=58040.0):
    state = StateVector(np.array([AU, 0.0, 0.0]), np.array([0.0, 3e4, 0.0]),
                        Epoch(mjd))
    return ImpactRecord(Epoch(mjd), GeodeticPoint(lat, lon, 0.0), 13.0, 60.0,
                        state)


def _track_moving_east(lats_lons):
    base = _impact_record(*lats_lons[0])
    entries = tuple(
        DeflectionEntry(float(k), _impact_record(lat, lon),
                        110.0 * k, 90.0)
        for k, (lat, lon) in enumerate(lats_lons[1:], start=1))
    return DeflectionTrack(base, entries)


def _gaussian_blob_raster(lat_c, lon_c, peak=1000.0, sigma_deg=2.0):
    cell = 0.25
    n_lon, n_lat = 1440, 720
    lats = 90.0 - (np.arange(n_lat) + 0.5) * cell
    lons = -180.0 + (np.arange(n_lon) + 0.5) * cell
    glat, glon = np.meshgrid(lats, lons, indexing="ij")
    d2 = (glat - lat_c) ** 2 + (glon - lon_c) ** 2
    vals = peak * np.exp(-0.5 * d2 / sigma_deg ** 2)
    return GeoRaster(n_lon, n_lat, -180.0, 90.0, cell, None, vals,
                     KIND_POPULATION)


class TestScoreTrack:
    def test_population_falls_moving_off_blob(self, tmp_path):
        pop = _gaussian_blob_raster(20.0, 60.0)
        light = _uniform_global(cell=0.5, value=30.0, kind=KIND_NIGHTLIGHT)
        pts = [(20.0, 60.0), (20.0, 62.0), (20.0, 64.0), (20.0, 66.0)]
        series = score_track(_track_moving_east(pts), pop, light)
        hcis = [d.hci for _, _, d in series.rows]
        assert all(b < a for a, b in zip(hcis, hcis[1:]))
        assert hcis[0] < 1.0
        assert series.best_months == 3.0
        out = tmp_path / "damage_series.csv"
        series.to_csv(out)
        lines = out.read_text().splitlines()
        assert lines[0] == "months,lat,lon,hci,idi,population,light_integral"
        assert len(lines) == 5
        first = lines[1].split(",")
        assert first[0] == "0" and first[3] == "1" and first[4] == "1"

    def test_idi_na_written_when_baseline_dark(self, tmp_path):
        pop = _uniform_global(cell=0.5, value=10.0)
        light = _uniform_global(cell=0.5, value=0.0, kind=KIND_NIGHTLIGHT)
        series = score_track(
            _track_moving_east([(20.0, 60.0), (20.0, 62.0)]), pop, light)
        out = tmp_path / "damage_series.csv"
        series.to_csv(out)
        lines = out.read_text().splitlines()
        assert lines[1].split(",")[4] == "NA"
        assert lines[2].split(",")[4] == "NA"

    def test_tie_breaks_on_shorter_push(self):
        pop = _gaussian_blob_raster(20.0, 60.0, sigma_deg=1.0)
        light = _uniform_global(cell=0.5, value=30.0, kind=KIND_NIGHTLIGHT)
        # both entries sit far off the blob: population ~0 for each,
        # identical idi, so the earlier month must win
        pts = [(20.0, 60.0), (-40.0, -120.0), (-40.0, -110.0)]
        series = score_track(_track_moving_east(pts), pop, light)
        assert series.best_months == 1.0

    def test_empty_track_rejected(self):
        pop = _uniform_global(cell=1.0)
        light = _uniform_global(cell=1.0, value=0.0, kind=KIND_NIGHTLIGHT)
        track = DeflectionTrack(_impact_record(10.0, 10.0), ())
        with pytest.raises(DomainError):
            score_track(track, pop, light)
