"""Propellant and spacecraft-mass bookkeeping for the ion propulsion.

The transfer trajectory is an input here, supplied as sampled
heliocentric distances r(t); this module only does the mass
arithmetic: thrust follows a (1/r)^exponent power law from available
solar power, mass flow is F/(g0*Isp), and integration is trapezoidal
over the profile samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .constants import G0, MONTH_DAYS
from .errors import DomainError, FormatError, PropellantError
from .timeframes import Epoch

__all__ = [
    "DeflectionPropellant",
    "PropulsionConfig",
    "ThrustArc",
    "ThrustSchedule",
    "deflection_propellant",
    "load_r_profile",
    "load_schedule",
    "mass_history",
    "thrust_at",
    "write_mass_history",
]

MIN_R_AU = 0.05


@dataclass(frozen=True)
class PropulsionConfig:
    """Ion propulsion system parameters."""

    isp_s: float
    f_max_1au_N: float
    exponent: float = 1.7
    m0_kg: float = 0.0
    dry_mass_kg: float = 0.0
    xenon_available_kg: Optional[float] = None

    def __post_init__(self):
        if self.isp_s <= 0.0:
            raise DomainError("specific impulse must be positive")
        if self.f_max_1au_N < 0.0:
            raise DomainError("max thrust must be non-negative")
        if self.m0_kg < 0.0 or self.dry_mass_kg < 0.0:
            raise DomainError("masses must be non-negative")
        if self.m0_kg and self.m0_kg <= self.dry_mass_kg:
            raise DomainError("initial mass must exceed the dry mass")
        if self.xenon_available_kg is not None and self.xenon_available_kg < 0:
            raise DomainError("xenon budget must be non-negative")


@dataclass(frozen=True)
class ThrustArc:
    start: Epoch
    end: Epoch
    throttle: float = 1.0

    def __post_init__(self):
        if not self.start < self.end:
            raise DomainError("arc must end after it starts")
        if not 0.0 <= self.throttle <= 1.0:
            raise DomainError("throttle must be in [0, 1]")


@dataclass(frozen=True)
class ThrustSchedule:
    """Time-ordered thrust arcs plus sampled heliocentric distances.

    The r profile must cover every arc so thrust can be evaluated
    anywhere inside one.
    """

    arcs: Tuple[ThrustArc, ...]
    r_profile: Tuple[Tuple[Epoch, float], ...]

    def __post_init__(self):
        arcs = tuple(self.arcs)
        prof = tuple(self.r_profile)
        for a, b in zip(arcs, arcs[1:]):
            if b.start < a.end:
                raise DomainError("arcs overlap or are out of order")
        ts = [p[0].mjd_tdb for p in prof]
        if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
            raise DomainError("r profile epochs must be strictly increasing")
        for _, r in prof:
            if r <= MIN_R_AU:
                raise DomainError(f"r profile dips to {r} au, too close to the Sun")
        if arcs:
            if not prof:
                raise DomainError("arcs present but r profile empty")
            if ts[0] > arcs[0].start.mjd_tdb + 1e-9 or \
                    ts[-1] < arcs[-1].end.mjd_tdb - 1e-9:
                raise DomainError("r profile does not cover the thrust arcs")
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "r_profile", prof)

    def r_at(self, epoch: Epoch) -> float:
        """Linearly interpolated heliocentric distance, au."""
        ts = [p[0].mjd_tdb for p in self.r_profile]
        t = epoch.mjd_tdb
        if not ts or t < ts[0] - 1e-9 or t > ts[-1] + 1e-9:
            raise DomainError("epoch outside the r profile span")
        if t <= ts[0]:
            return self.r_profile[0][1]
        for i in range(1, len(ts)):
            if t <= ts[i]:
                f = (t - ts[i - 1]) / (ts[i] - ts[i - 1])
                return (1 - f) * self.r_profile[i - 1][1] + f * self.r_profile[i][1]
        return self.r_profile[-1][1]


def thrust_at(r_au: float, cfg: PropulsionConfig, throttle: float = 1.0) -> float:
    """Thrust available at heliocentric distance r, N.

    Solar power scales the 1 au thrust by (1/r)^exponent; inside 1 au
    the hardware maximum still caps it.
    """
    if r_au <= MIN_R_AU:
        raise DomainError(f"r = {r_au} au is inside the {MIN_R_AU} au guard")
    if not 0.0 <= throttle <= 1.0:
        raise DomainError("throttle must be in [0, 1]")
    return min(cfg.f_max_1au_N * throttle * r_au ** -cfg.exponent,
               cfg.f_max_1au_N)


def _arc_sample_epochs(arc: ThrustArc,
                       schedule: ThrustSchedule) -> List[Epoch]:
    t0, t1 = arc.start.mjd_tdb, arc.end.mjd_tdb
    inner = [p[0] for p in schedule.r_profile
             if t0 < p[0].mjd_tdb < t1]
    return [arc.start] + inner + [arc.end]


def mass_history(schedule: ThrustSchedule,
                 cfg: PropulsionConfig) -> List[Tuple[Epoch, float]]:
    """Spacecraft mass over the schedule, trapezoid per thrust arc.

    dm/dt = -F(r(t))/(g0*Isp) while thrusting; mass holds on coasts.
    Raises a propellant error, carrying the crossing epoch, if the
    mass would reach the dry floor.
    """
    if cfg.m0_kg <= 0.0:
        raise DomainError("initial mass required for a mass history")
    m = cfg.m0_kg
    hist: List[Tuple[Epoch, float]] = []
    if not schedule.arcs:
        if schedule.r_profile:
            hist.append((schedule.r_profile[0][0], m))
            if len(schedule.r_profile) > 1:
                hist.append((schedule.r_profile[-1][0], m))
        return hist

    first = schedule.arcs[0]
    if schedule.r_profile[0][0] < first.start:
        hist.append((schedule.r_profile[0][0], m))
    for arc in schedule.arcs:
        if not hist or hist[-1][0].mjd_tdb < arc.start.mjd_tdb - 1e-12:
            hist.append((arc.start, m))
        epochs = _arc_sample_epochs(arc, schedule)
        rate_prev = thrust_at(schedule.r_at(epochs[0]), cfg, arc.throttle) \
            / (G0 * cfg.isp_s)
        for e_prev, e_next in zip(epochs, epochs[1:]):
            rate_next = thrust_at(schedule.r_at(e_next), cfg, arc.throttle) \
                / (G0 * cfg.isp_s)
            dt = e_next - e_prev
            dm = 0.5 * (rate_prev + rate_next) * dt
            if m - dm <= cfg.dry_mass_kg:
                # linear-in-step estimate of where the floor is hit
                frac = (m - cfg.dry_mass_kg) / dm if dm > 0 else 0.0
                when = e_prev.plus_seconds(frac * dt)
                raise PropellantError(
                    f"propellant exhausted (dry floor {cfg.dry_mass_kg} kg)",
                    epoch=when)
            m -= dm
            hist.append((e_next, m))
            rate_prev = rate_next
    last = schedule.arcs[-1].end
    tail = schedule.r_profile[-1][0]
    if tail.mjd_tdb > last.mjd_tdb + 1e-12:
        hist.append((tail, m))
    return hist


@dataclass(frozen=True)
class DeflectionPropellant:
    """Xenon needed to hold the beam on the asteroid for a push."""

    duration_months: float
    single_side_kg: float
    dual_side_kg: float
    budget_exceeded: Optional[bool]    # None when no xenon budget is set


def deflection_propellant(duration_months: float,
                          r_profile: Sequence[Tuple[Epoch, float]],
                          cfg: PropulsionConfig,
                          f0_side_N: float = 0.185,
                          start: Optional[Epoch] = None) -> DeflectionPropellant:
    """Propellant for a slow-push arc of the given duration.

    The beam-side force follows the same (1/r)^exponent law as the
    push on the asteroid; station keeping needs an equal and opposite
    counter-thruster, so the dual-sided figure is twice the single.
    The budget flag compares dual-sided use against the configured
    xenon; both accountings are reported.
    """
    if duration_months < 0.0:
        raise DomainError("duration must be non-negative")
    if f0_side_N < 0.0:
        raise DomainError("side thrust must be non-negative")
    prof = tuple(r_profile)
    if duration_months == 0.0:
        flag = None if cfg.xenon_available_kg is None else False
        return DeflectionPropellant(0.0, 0.0, 0.0, flag)
    if not prof:
        raise DomainError("r profile required for a nonzero push")
    t0 = start if start is not None else prof[0][0]
    t1 = t0.plus_days(duration_months * MONTH_DAYS)
    sched = ThrustSchedule((), prof)       # reuse validation + interpolation
    if prof[0][0].mjd_tdb > t0.mjd_tdb + 1e-9 or \
            prof[-1][0].mjd_tdb < t1.mjd_tdb - 1e-9:
        raise DomainError("r profile does not cover the push window")

    epochs = [t0] + [p[0] for p in prof
                     if t0.mjd_tdb < p[0].mjd_tdb < t1.mjd_tdb] + [t1]
    used = 0.0
    rate_prev = f0_side_N * sched.r_at(epochs[0]) ** -cfg.exponent \
        / (G0 * cfg.isp_s)
    for e_prev, e_next in zip(epochs, epochs[1:]):
        rate_next = f0_side_N * sched.r_at(e_next) ** -cfg.exponent \
            / (G0 * cfg.isp_s)
        used += 0.5 * (rate_prev + rate_next) * (e_next - e_prev)
        rate_prev = rate_next
    dual = 2.0 * used
    flag = None if cfg.xenon_available_kg is None \
        else dual > cfg.xenon_available_kg
    return DeflectionPropellant(duration_months, used, dual, flag)


def _split_csv_line(path, lineno: int, line: str, n: int) -> List[str]:
    parts = [p.strip() for p in line.split(",")]
    if len(parts) != n:
        raise FormatError(f"{path}:{lineno}: expected {n} columns, "
                          f"got {len(parts)}")
    return parts


def load_schedule(path) -> List[ThrustArc]:
    """Read thrust arcs from CSV `arc,start_mjd,end_mjd,throttle`."""
    arcs = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "arc,start_mjd,end_mjd,throttle":
            raise FormatError(f"{path}:1: unexpected header {header!r}")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            _, s, e, th = _split_csv_line(path, lineno, line, 4)
            try:
                arc = ThrustArc(Epoch(float(s)), Epoch(float(e)), float(th))
            except (ValueError, DomainError) as exc:
                raise FormatError(f"{path}:{lineno}: {exc}")
            arcs.append(arc)
    return arcs


def load_r_profile(path) -> List[Tuple[Epoch, float]]:
    """Read sampled heliocentric distances from CSV `mjd,r_au`."""
    prof = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "mjd,r_au":
            raise FormatError(f"{path}:1: unexpected header {header!r}")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            t, r = _split_csv_line(path, lineno, line, 2)
            try:
                prof.append((Epoch(float(t)), float(r)))
            except (ValueError, DomainError) as exc:
                raise FormatError(f"{path}:{lineno}: {exc}")
    return prof


def write_mass_history(history: Sequence[Tuple[Epoch, float]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("mjd,mass_kg\n")
        for epoch, m in history:
            fh.write("%.8f,%.6f\n" % (epoch.mjd_tdb, m))
