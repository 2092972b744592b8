"""Scenario-driven command line front end.

Each subcommand reads one config file, runs the matching analysis,
and writes deterministic CSV/GeoJSON artifacts plus a run manifest.
Exit codes: 0 success (impact found where one was sought), 2 config
or input-file error, 3 clean miss, 4 missing chained input, 1
internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from . import __version__
from ._parallel import ordered_map
from .budget import (
    PropulsionConfig,
    ThrustSchedule,
    load_r_profile,
    load_schedule,
    mass_history,
    write_mass_history,
)
from .constants import AU, DAY
from .deflection import AsteroidBody, DeflectionTrack, ThrustLaw, deflection_sweep
from .dispersion import (
    FrenetFrame,
    impact_ellipse,
    propagate_covariance,
    rendezvous_covariance,
)
from .dynamics import (
    DEFAULT_INTEGRATOR,
    ForceModelConfig,
    IntegratorConfig,
    propagate,
)
from .elements import (
    CONVENTION_STANDARD,
    CONVENTION_SWAPPED,
    FRAME_J2000,
    FRAME_OF_DATE,
    EquinoctialElements,
    state_from_elements,
)
from .ephemeris import Body, load_ephemeris_table
from .errors import (
    ChainedInputError,
    ConfigError,
    DomainError,
    FormatError,
    SlowpushError,
)
from .exposure import damage_indexes, disc_integral, load_nightlight, load_population_grid
from .impact import ImpactRecord, MissRecord, impact_from_elements, risk_path
from .timeframes import Epoch, GeodeticPoint

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_MISS = 3
EXIT_CHAINED = 4

_SCHEMA = {
    "run": {"out_dir"},
    "elements": {"a_au", "p1", "p2", "q1", "q2", "ml_deg", "epoch_mjd_tdb",
                 "frame", "convention", "epoch_offset_days"},
    "force": {"perturbers", "relativity"},
    "integrator": {"rel_tol", "abs_tol_pos_m", "abs_tol_vel_ms",
                   "max_step_days", "min_step_s"},
    "propagate": {"horizon_days"},
    "risk": {"offsets"},
    "dispersion": {"rendezvous_mjd_tdb", "sigma_level", "checkpoint_days"},
    "deflection": {"f0_n", "exponent", "sign", "start_mjd_tdb", "months"},
    "asteroid": {"diameter_m", "density_kgm3"},
    "exposure": {"population_path", "nightlight_path", "radius_km"},
    "budget": {"isp_s", "f_max_1au_n", "exponent", "m0_kg", "dry_mass_kg",
               "xenon_available_kg", "schedule_path", "r_profile_path"},
    "ephemeris": {"source"},
}


@dataclass
class ScenarioConfig:
    path: str
    raw: bytes
    sections: Dict[str, Dict[str, Tuple[str, int]]]

    def get(self, section: str, key: str, default=None) -> Optional[str]:
        entry = self.sections.get(section, {}).get(key)
        return entry[0] if entry else default

    def require(self, section: str, key: str) -> str:
        val = self.get(section, key)
        if val is None:
            raise ConfigError(f"{self.path}: missing required key "
                              f"{section}.{key}")
        return val

    def _typed(self, section: str, key: str, default, caster, what: str):
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return caster(raw)
        except ValueError:
            lineno = self.sections[section][key][1]
            raise ConfigError(f"{self.path}:{lineno}: {section}.{key} "
                              f"must be {what}, got {raw!r}")

    def get_float(self, section: str, key: str, default=None):
        return self._typed(section, key, default, float, "a number")

    def require_float(self, section: str, key: str) -> float:
        self.require(section, key)
        return self.get_float(section, key)

    def get_bool(self, section: str, key: str, default: bool) -> bool:
        def cast(raw):
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(low)
        return self._typed(section, key, default, cast, "a boolean")


def load_config(path: str) -> ScenarioConfig:
    """Parse a flat key = value config with [section] headers."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}")
    sections: Dict[str, Dict[str, Tuple[str, int]]] = {}
    current = None
    for lineno, raw_line in enumerate(raw.decode("utf-8").splitlines(), 1):
        line = raw_line.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown section [{name}]")
            if name in sections:
                raise ConfigError(f"{path}:{lineno}: duplicate section [{name}]")
            sections[name] = {}
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        if current is None:
            raise ConfigError(f"{path}:{lineno}: key outside any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA[current]:
            raise ConfigError(f"{path}:{lineno}: unknown key "
                              f"{current}.{key}")
        if key in sections[current]:
            raise ConfigError(f"{path}:{lineno}: duplicate key "
                              f"{current}.{key}")
        sections[current][key] = (value, lineno)
    return ScenarioConfig(path, raw, sections)


def _elements_from_config(cfg: ScenarioConfig):
    el = EquinoctialElements(
        a=cfg.require_float("elements", "a_au") * AU,
        p1=cfg.require_float("elements", "p1"),
        p2=cfg.require_float("elements", "p2"),
        q1=cfg.require_float("elements", "q1"),
        q2=cfg.require_float("elements", "q2"),
        ml_deg=cfg.require_float("elements", "ml_deg"),
        epoch=Epoch(cfg.require_float("elements", "epoch_mjd_tdb")),
    )
    offset = cfg.get_float("elements", "epoch_offset_days", 0.0)
    if offset:
        el = el.with_epoch(el.epoch.plus_days(offset))
    frame = cfg.get("elements", "frame", FRAME_OF_DATE)
    if frame not in (FRAME_OF_DATE, FRAME_J2000):
        raise ConfigError(f"{cfg.path}: elements.frame must be "
                          f"{FRAME_OF_DATE} or {FRAME_J2000}")
    convention = cfg.get("elements", "convention", CONVENTION_STANDARD)
    if convention not in (CONVENTION_STANDARD, CONVENTION_SWAPPED):
        raise ConfigError(f"{cfg.path}: elements.convention must be "
                          f"{CONVENTION_STANDARD} or {CONVENTION_SWAPPED}")
    return el, frame, convention


def _ephemeris_from_config(cfg: ScenarioConfig, flag: Optional[str]):
    spec = flag if flag is not None else cfg.get("ephemeris", "source", "analytic")
    if spec == "analytic":
        return None
    if spec.startswith("table:"):
        path = spec[len("table:"):]
        if not os.path.isfile(path):
            raise ConfigError(f"ephemeris table not found: {path}")
        return load_ephemeris_table(path)
    raise ConfigError(f"ephemeris source must be 'analytic' or 'table:PATH', "
                      f"got {spec!r}")


def _force_from_config(cfg: ScenarioConfig, source) -> ForceModelConfig:
    names = cfg.get("force", "perturbers", "all")
    if names == "all":
        perturbers = None
    elif names == "none":
        perturbers = frozenset()
    else:
        members = []
        for tok in names.split(","):
            tok = tok.strip().upper()
            if tok not in Body.__members__:
                raise ConfigError(f"{cfg.path}: unknown perturber {tok!r}")
            members.append(Body[tok])
        perturbers = frozenset(members)
    rel = cfg.get_bool("force", "relativity", True)
    if perturbers is None:
        return ForceModelConfig(relativity=rel, source=source)
    return ForceModelConfig(perturbers=perturbers, relativity=rel,
                            source=source)


def _integrator_from_config(cfg: ScenarioConfig) -> IntegratorConfig:
    return IntegratorConfig(
        rel_tol=cfg.get_float("integrator", "rel_tol", DEFAULT_INTEGRATOR.rel_tol),
        abs_tol_pos=cfg.get_float("integrator", "abs_tol_pos_m",
                                  DEFAULT_INTEGRATOR.abs_tol_pos),
        abs_tol_vel=cfg.get_float("integrator", "abs_tol_vel_ms",
                                  DEFAULT_INTEGRATOR.abs_tol_vel),
        max_step=cfg.get_float("integrator", "max_step_days",
                               DEFAULT_INTEGRATOR.max_step / DAY) * DAY,
        min_step=cfg.get_float("integrator", "min_step_s",
                               DEFAULT_INTEGRATOR.min_step),
    )


def _parse_offsets(cfg: ScenarioConfig) -> List[float]:
    raw = cfg.require("risk", "offsets")
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ConfigError(f"{cfg.path}: risk.offsets range must be "
                              "lo:hi:step")
        try:
            lo, hi, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"{cfg.path}: bad number in risk.offsets")
        if step <= 0 or hi < lo:
            raise ConfigError(f"{cfg.path}: risk.offsets needs hi >= lo and "
                              "step > 0")
        n = int((hi - lo) / step + 1e-9)
        return [lo + k * step for k in range(n + 1)]
    try:
        return [float(p) for p in raw.split(",")]
    except ValueError:
        raise ConfigError(f"{cfg.path}: bad number in risk.offsets")


def _parse_months(cfg: ScenarioConfig) -> List[float]:
    raw = cfg.require("deflection", "months")
    if ".." in raw:
        lo_s, _, hi_s = raw.partition("..")
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError:
            raise ConfigError(f"{cfg.path}: deflection.months range must be "
                              "integer lo..hi")
        if hi < lo:
            raise ConfigError(f"{cfg.path}: deflection.months range is empty")
        vals = [float(m) for m in range(lo, hi + 1)]
    else:
        try:
            vals = [float(p) for p in raw.split(",")]
        except ValueError:
            raise ConfigError(f"{cfg.path}: bad number in deflection.months")
    return [m for m in vals if m > 0.0]


class _Run:
    """Tracks written artifacts so failures can clean up after themselves."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.files: List[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        p = os.path.join(self.out_dir, name)
        self.files.append(p)
        return p

    def discard_partials(self) -> None:
        for p in self.files:
            try:
                os.remove(p)
            except OSError:
                pass
        self.files = []


def _write_manifest(run: _Run, command: str, cfg: ScenarioConfig,
                    status: str, started: float,
                    error: Optional[str] = None) -> None:
    outputs = []
    for p in run.files:
        if not os.path.isfile(p):
            continue
        with open(p, "rb") as fh:
            blob = fh.read()
        outputs.append({
            "name": os.path.basename(p),
            "bytes": len(blob),
            "sha256": hashlib.sha256(blob).hexdigest(),
        })
    manifest = {
        "command": command,
        "config_sha256": hashlib.sha256(cfg.raw).hexdigest(),
        "tool_version": __version__,
        "wall_clock_s": round(time.monotonic() - started, 3),
        "status": status,
        "outputs": outputs,
    }
    if error is not None:
        manifest["error"] = error
    with open(os.path.join(run.out_dir, "run_manifest.json"), "w",
              encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _write_trajectory(path: str, traj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("mjd_tdb,x_m,y_m,z_m,vx_ms,vy_ms,vz_ms\n")
        for s in traj.sample(1.0):
            fh.write("%.8f,%.10e,%.10e,%.10e,%.10e,%.10e,%.10e\n" % (
                s.epoch.mjd_tdb, *s.r, *s.v))


def cmd_propagate(cfg: ScenarioConfig, run: _Run, threads, eph=None) -> int:
    el, frame, conv = _elements_from_config(cfg)
    source = _ephemeris_from_config(cfg, eph)
    fcfg = _force_from_config(cfg, source)
    icfg = _integrator_from_config(cfg)
    horizon = cfg.get_float("propagate", "horizon_days", 3000.0)
    rec = impact_from_elements(el, fcfg, icfg, frame, conv, horizon)
    s0 = state_from_elements(el, frame=frame, convention=conv)
    if isinstance(rec, ImpactRecord):
        with open(run.path("impact.csv"), "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write("lat,lon,epoch_utc_mjd,speed_kms,incidence_deg\n")
            fh.write("%.6f,%.6f,%.8f,%.6f,%.4f\n" % (
                rec.point.lat_deg, rec.point.lon_deg, rec.epoch_utc.mjd_tdb,
                rec.speed_kms, rec.incidence_deg))
        _write_trajectory(run.path("trajectory.csv"),
                          propagate(s0, rec.state.epoch, fcfg, icfg))
        print("impact lat=%.4f lon=%.4f mjd_utc=%.5f speed=%.2f km/s "
              "incidence=%.1f deg" % (rec.point.lat_deg, rec.point.lon_deg,
                                      rec.epoch_utc.mjd_tdb, rec.speed_kms,
                                      rec.incidence_deg))
        return EXIT_OK
    with open(run.path("closest_approach.csv"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("closest_km,epoch_mjd_tdb\n")
        fh.write("%.3f,%.8f\n" % (rec.closest_approach_m / 1e3,
                                  rec.epoch.mjd_tdb))
    _write_trajectory(run.path("trajectory.csv"),
                      propagate(s0, s0.epoch.plus_days(horizon), fcfg, icfg))
    print("miss: closest approach %.0f km at mjd_tdb %.5f" % (
        rec.closest_approach_m / 1e3, rec.epoch.mjd_tdb))
    return EXIT_MISS


def cmd_risk(cfg: ScenarioConfig, run: _Run, threads, eph=None) -> int:
    el, frame, conv = _elements_from_config(cfg)
    source = _ephemeris_from_config(cfg, eph)
    fcfg = _force_from_config(cfg, source)
    icfg = _integrator_from_config(cfg)
    horizon = cfg.get_float("propagate", "horizon_days", 3000.0)
    offsets = _parse_offsets(cfg)
    path = risk_path(el, offsets, fcfg, icfg, frame, conv, horizon,
                     max_workers=threads)
    path.to_csv(run.path("riskpath.csv"))
    path.to_geojson(run.path("riskpath.geojson"))
    hits = path.impacts()
    print("risk path: %d of %d offsets impact" % (len(hits), len(offsets)))
    return EXIT_OK if hits else EXIT_MISS


def cmd_dispersion(cfg: ScenarioConfig, run: _Run, threads, eph=None) -> int:
    el, frame, conv = _elements_from_config(cfg)
    source = _ephemeris_from_config(cfg, eph)
    fcfg = _force_from_config(cfg, source)
    icfg = _integrator_from_config(cfg)
    horizon = cfg.get_float("propagate", "horizon_days", 3000.0)
    rdv = Epoch(cfg.require_float("dispersion", "rendezvous_mjd_tdb"))
    sigma_level = cfg.get_float("dispersion", "sigma_level", 1.0)
    checkpoint = cfg.get_float("dispersion", "checkpoint_days", 30.0)

    nominal = impact_from_elements(el, fcfg, icfg, frame, conv, horizon)
    if not isinstance(nominal, ImpactRecord):
        print("miss: no nominal impact, nothing to disperse")
        return EXIT_MISS
    s0 = state_from_elements(el, frame=frame, convention=conv)
    s_rdv = propagate(s0, rdv, fcfg, icfg).final_state
    p0 = rendezvous_covariance()
    fr = FrenetFrame.from_state(s_rdv)
    _, history = propagate_covariance(p0, s_rdv, nominal.state.epoch, fcfg,
                                      icfg, frame=fr,
                                      checkpoint_days=checkpoint,
                                      max_workers=threads)
    with open(run.path("sigma_history.csv"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("mjd_tdb,sigma_km\n")
        for epoch, sig_m in history:
            fh.write("%.8f,%.6f\n" % (epoch.mjd_tdb, sig_m / 1e3))
    ellipse = impact_ellipse(p0, s_rdv, fcfg, icfg, sigma_level, fr,
                             horizon_days=horizon, max_workers=threads)
    ellipse.to_csv(run.path("ellipse.csv"))
    ellipse.to_geojson(run.path("ellipse.geojson"))
    print("dispersion: sigma %.1f km, ellipse %.1f x %.1f km at az %.1f deg"
          % (history[-1][1] / 1e3, ellipse.semi_major_km,
             ellipse.semi_minor_km, ellipse.azimuth_deg))
    return EXIT_OK


def cmd_deflect(cfg: ScenarioConfig, run: _Run, threads, eph=None) -> int:
    el, frame, conv = _elements_from_config(cfg)
    source = _ephemeris_from_config(cfg, eph)
    fcfg = _force_from_config(cfg, source)
    icfg = _integrator_from_config(cfg)
    horizon = cfg.get_float("propagate", "horizon_days", 3000.0)
    body = AsteroidBody(cfg.require_float("asteroid", "diameter_m"),
                        cfg.require_float("asteroid", "density_kgm3"))
    sign = cfg.get_float("deflection", "sign", -1.0)
    if sign not in (1.0, -1.0):
        raise ConfigError(f"{cfg.path}: deflection.sign must be 1 or -1")
    law = ThrustLaw(
        f0_N=cfg.require_float("deflection", "f0_n"),
        exponent=cfg.get_float("deflection", "exponent", 1.7),
        sign=int(sign),
        start=Epoch(cfg.get_float("deflection", "start_mjd_tdb", 58788.0)),
    )
    months = _parse_months(cfg)
    if months:
        track = deflection_sweep(el, body, law, months, fcfg, icfg, frame,
                                 conv, horizon, max_workers=threads)
    else:
        base = impact_from_elements(el, fcfg, icfg, frame, conv, horizon)
        if not isinstance(base, ImpactRecord):
            print("miss: undeflected trajectory does not impact")
            return EXIT_MISS
        track = DeflectionTrack(base, ())
    track.to_csv(run.path("deflection_track.csv"))
    track.to_geojson(run.path("deflection_track.geojson"))
    if track.entries:
        last = track.entries[-1]
        print("deflection: %d durations, %.0f-month displacement %.1f km"
              % (len(track.entries), last.months, last.displacement_km))
    else:
        print("deflection: baseline only")
    return EXIT_OK


def _read_track_csv(path: str):
    """Rows of deflection_track.csv as (months, GeodeticPoint)."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != ("months,lat,lon,displacement_km,bearing_deg,"
                      "impact_epoch_mjd_utc"):
            raise FormatError(f"{path}:1: unexpected header {header!r}")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise FormatError(f"{path}:{lineno}: expected 6 columns")
            try:
                months = float(parts[0])
                pt = GeodeticPoint(float(parts[1]), float(parts[2]))
            except ValueError:
                raise FormatError(f"{path}:{lineno}: bad number")
            rows.append((months, pt))
    return rows


def cmd_damage(cfg: ScenarioConfig, run: _Run, threads, eph=None) -> int:
    track_path = os.path.join(run.out_dir, "deflection_track.csv")
    if not os.path.isfile(track_path):
        raise ChainedInputError(
            f"{track_path} not found; run the deflect command first")
    pop_path = cfg.require("exposure", "population_path")
    light_path = cfg.require("exposure", "nightlight_path")
    for p in (pop_path, light_path):
        if not os.path.isfile(p):
            raise ConfigError(f"raster not found: {p}")
    radius = cfg.get_float("exposure", "radius_km", 100.0)
    rows = _read_track_csv(track_path)
    if not rows or rows[0][0] != 0.0:
        raise FormatError(f"{track_path}: first row must be the months=0 "
                          "baseline")
    pop = load_population_grid(pop_path)
    light = load_nightlight(light_path)
    base_pt = rows[0][1]
    p0, _ = disc_integral(pop, base_pt, radius)
    l0, _ = disc_integral(light, base_pt, radius)

    def score(row):
        months, pt = row
        return damage_indexes(pop, light, pt, base_pt, radius)

    scored = ordered_map(score, rows[1:], threads)
    with open(run.path("damage_series.csv"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("months,lat,lon,hci,idi,population,light_integral\n")
        base_idi = "NA" if l0 <= 0.0 else "1"
        fh.write("0,%.6f,%.6f,1,%s,%.10g,%.10g\n" % (
            base_pt.lat_deg, base_pt.lon_deg, base_idi, p0, l0))
        for (months, pt), d in zip(rows[1:], scored):
            idi = "NA" if d.idi is None else "%.10g" % d.idi
            fh.write("%.10g,%.6f,%.6f,%.10g,%s,%.10g,%.10g\n" % (
                months, pt.lat_deg, pt.lon_deg, d.hci, idi, d.population,
                d.light_integral))
    if scored:
        best = min(zip((r[0] for r in rows[1:]), scored),
                   key=lambda t: (t[1].population,
                                  math.inf if t[1].idi is None else t[1].idi,
                                  t[0]))
        print("damage: best duration %g months (population %.0f)"
              % (best[0], best[1].population))
    else:
        print("damage: baseline only (population %.0f)" % p0)
    return EXIT_OK


def cmd_budget(cfg: ScenarioConfig, run: _Run, threads, eph=None) -> int:
    sched_path = cfg.require("budget", "schedule_path")
    prof_path = cfg.require("budget", "r_profile_path")
    for p in (sched_path, prof_path):
        if not os.path.isfile(p):
            raise ConfigError(f"input file not found: {p}")
    try:
        pcfg = PropulsionConfig(
            isp_s=cfg.require_float("budget", "isp_s"),
            f_max_1au_N=cfg.require_float("budget", "f_max_1au_n"),
            exponent=cfg.get_float("budget", "exponent", 1.7),
            m0_kg=cfg.require_float("budget", "m0_kg"),
            dry_mass_kg=cfg.get_float("budget", "dry_mass_kg", 0.0),
            xenon_available_kg=cfg.get_float("budget", "xenon_available_kg",
                                             None),
        )
        schedule = ThrustSchedule(tuple(load_schedule(sched_path)),
                                  tuple(load_r_profile(prof_path)))
    except DomainError as exc:
        raise ConfigError(str(exc))
    hist = mass_history(schedule, pcfg)
    write_mass_history(hist, run.path("mass_history.csv"))
    used = hist[0][1] - hist[-1][1] if hist else 0.0
    print("budget: %.2f kg propellant over %d arcs" % (used,
                                                       len(schedule.arcs)))
    return EXIT_OK


_COMMANDS = {
    "propagate": cmd_propagate,
    "risk": cmd_risk,
    "dispersion": cmd_dispersion,
    "deflect": cmd_deflect,
    "damage": cmd_damage,
    "budget": cmd_budget,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="slowpush",
        description="Asteroid impact-corridor and slow-push deflection "
                    "analysis")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="scenario config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads (1 = serial)")
    parser.add_argument("--ephemeris", default=None,
                        help="'analytic' or 'table:PATH'; overrides config")
    args = parser.parse_args(argv)

    started = time.monotonic()
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = args.out
    if out_dir == "." and cfg.get("run", "out_dir"):
        out_dir = cfg.get("run", "out_dir")
    run = _Run(out_dir)
    threads = args.threads if args.threads and args.threads > 1 else None
    try:
        code = _COMMANDS[args.command](cfg, run, threads, args.ephemeris)
    except ConfigError as exc:
        run.discard_partials()
        _write_manifest(run, args.command, cfg, "failed", started, str(exc))
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FormatError as exc:
        run.discard_partials()
        _write_manifest(run, args.command, cfg, "failed", started, str(exc))
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ChainedInputError as exc:
        run.discard_partials()
        _write_manifest(run, args.command, cfg, "failed", started, str(exc))
        print(f"missing chained input: {exc}", file=sys.stderr)
        return EXIT_CHAINED
    except SlowpushError as exc:
        run.discard_partials()
        _write_manifest(run, args.command, cfg, "failed", started, str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    _write_manifest(run, args.command, cfg, "ok", started)
    return code


if __name__ == "__main__":
    sys.exit(main())
