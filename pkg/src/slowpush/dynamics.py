"""Force model and adaptive propagation with event detection.

The propagator is a Dormand-Prince 8(5,3) embedded pair (scipy's
DOP853) with PI step control and per-step dense output; the force
model is heliocentric two-body plus point-mass perturbers (direct and
indirect terms), an optional first-order relativistic correction, and
an optional tangential thrust law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from . import _kernels
from .constants import AU, C_LIGHT, DAY, GM_SUN, KERNEL_GM
from .elements import StateVector
from .ephemeris import (
    ASTEROID_EL,
    DEFAULT_PERTURBERS,
    PLANET_EL0,
    PLANET_RATE,
    Body,
    kernel_state,
)
from .errors import CloseEncounterError, DomainError, RangeError, StepSizeError
from .timeframes import Epoch

__all__ = [
    "DEFAULT_INTEGRATOR",
    "ForceModelConfig",
    "IntegratorConfig",
    "Trajectory",
    "acceleration",
    "find_event",
    "make_rhs",
    "propagate",
]

# bodies closer than this to the integrated state make the point-mass
# model meaningless (surface impact or flyby handled by event logic)
CLOSE_ENCOUNTER_GUARD_M = 1.0e7


@dataclass(frozen=True)
class ForceModelConfig:
    """Which forces act on the propagated body.

    `thrust` is a deflection-module ThrustLaw; it needs `asteroid` (an
    AsteroidBody) alongside it to fix the produced acceleration.
    `source` selects the ephemeris: None for the built-in analytic
    model, or a TabulatedEphemeris for file-backed states.
    """

    perturbers: frozenset = DEFAULT_PERTURBERS
    relativity: bool = True
    thrust: Optional[object] = None
    asteroid: Optional[object] = None
    source: Optional[object] = None

    def __post_init__(self):
        if Body.SUN in self.perturbers:
            raise DomainError("the Sun is the central body, not a perturber")
        for b in self.perturbers:
            if not isinstance(b, Body):
                raise DomainError(f"unknown perturber: {b!r}")
        if self.thrust is not None and self.asteroid is None:
            raise DomainError("a thrust law needs an asteroid body for its mass")


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and step bounds for the adaptive integrator.

    min_step is enforced by failure detection: the integrator has no
    hard floor, but a step-size underflow surfaces as StepSizeError.
    """

    rel_tol: float = 1e-12
    abs_tol_pos: float = 1e-3      # m
    abs_tol_vel: float = 1e-9      # m/s
    max_step: float = 2.0 * DAY    # s; larger caps cost meters per orbit
    min_step: float = 1e-3         # s

    def __post_init__(self):
        if not 0.0 < self.rel_tol <= 1e-6:
            raise DomainError(f"rel_tol must be in (0, 1e-6], got {self.rel_tol}")
        if self.abs_tol_pos <= 0.0 or self.abs_tol_vel <= 0.0:
            raise DomainError("absolute tolerances must be positive")
        if not 0.0 < self.min_step < self.max_step:
            raise DomainError("need 0 < min_step < max_step")

    @property
    def abs_tol(self) -> np.ndarray:
        return np.array([self.abs_tol_pos] * 3 + [self.abs_tol_vel] * 3)


DEFAULT_INTEGRATOR = IntegratorConfig()


def _perturber_mask(perturbers) -> np.ndarray:
    mask = np.zeros(12, dtype=np.bool_)
    for b in perturbers:
        mask[b.value] = True
    return mask


def _thrust_params(cfg: ForceModelConfig) -> np.ndarray:
    # layout: [active, acc_1au, exponent, sign, start_mjd, end_mjd]
    if cfg.thrust is None:
        return np.zeros(6)
    law = cfg.thrust
    start = law.start.mjd_tdb
    return np.array([
        1.0,
        law.f0_N / cfg.asteroid.mass_kg,
        float(law.exponent),
        float(law.sign),
        start,
        start + law.duration_days,
    ])


def make_rhs(cfg: ForceModelConfig, ref_mjd: float) -> Callable:
    """Build the ODE right-hand side f(t_s, y) -> dy/dt for a config.

    Time is seconds past ref_mjd.  The analytic-ephemeris path runs
    compiled; a tabulated source falls back to a numpy implementation.
    """
    mask = _perturber_mask(cfg.perturbers)
    thr = _thrust_params(cfg)
    rel = bool(cfg.relativity)
    if cfg.source is None:
        def rhs(t, y):
            return _kernels._accel(t, y, ref_mjd, mask, rel, KERNEL_GM,
                                   PLANET_EL0, PLANET_RATE, ASTEROID_EL, thr)
        return rhs

    source = cfg.source
    bodies = sorted(cfg.perturbers, key=lambda b: b.value)

    def rhs_table(t, y):
        mjd = ref_mjd + t / DAY
        epoch = Epoch(mjd)
        r = y[:3]
        v = y[3:]
        rn = float(np.linalg.norm(r))
        acc = -GM_SUN * r / rn ** 3
        for b in bodies:
            rb = source.state(b, epoch).r
            d = rb - r
            acc += b.gm * (d / float(np.linalg.norm(d)) ** 3
                           - rb / float(np.linalg.norm(rb)) ** 3)
        if rel:
            v2 = float(np.dot(v, v))
            rv = float(np.dot(r, v))
            k = GM_SUN / (C_LIGHT ** 2 * rn ** 3)
            acc += k * ((4.0 * GM_SUN / rn - v2) * r + 4.0 * rv * v)
        if thr[0] > 0.5 and thr[4] <= mjd < thr[5]:
            vn = float(np.linalg.norm(v))
            if vn > 0.0:
                acc += thr[3] * thr[1] * (AU / rn) ** thr[2] * v / vn
        return np.concatenate((v, acc))

    return rhs_table


def acceleration(s: StateVector, cfg: ForceModelConfig) -> np.ndarray:
    """Total modeled acceleration at a state (m/s^2).

    Raises DomainError inside 0.05 AU of the Sun and
    CloseEncounterError within 1e4 km of any perturber; propagations
    are expected to hand off to event logic before reaching either.
    """
    rn = float(np.linalg.norm(s.r))
    if rn <= 0.05 * AU:
        raise DomainError(f"state at {rn / AU:.4f} AU is inside the solver domain guard")
    mjd = s.epoch.mjd_tdb
    for b in sorted(cfg.perturbers, key=lambda bb: bb.value):
        if cfg.source is None:
            rb = kernel_state(b.value, mjd)[:3]
        else:
            rb = cfg.source.state(b, s.epoch).r
        if float(np.linalg.norm(rb - s.r)) < CLOSE_ENCOUNTER_GUARD_M:
            raise CloseEncounterError(
                f"state within {CLOSE_ENCOUNTER_GUARD_M / 1e3:.0f} km of {b.name}")
    rhs = make_rhs(cfg, mjd)
    return np.asarray(rhs(0.0, s.as_array()))[3:]


@dataclass
class Trajectory:
    """Dense propagation result over [t0, tf] (tf may precede t0)."""

    ref: Epoch                      # epoch of t = 0 s
    t_s: np.ndarray                 # accepted step times, s past ref
    y: np.ndarray                   # states at accepted steps, shape (6, n)
    _sol: Optional[object] = field(default=None, repr=False)

    @property
    def t0(self) -> Epoch:
        return self.ref.plus_seconds(float(self.t_s[0]))

    @property
    def tf(self) -> Epoch:
        return self.ref.plus_seconds(float(self.t_s[-1]))

    @property
    def initial_state(self) -> StateVector:
        return StateVector.from_array(self.y[:, 0], self.t0)

    @property
    def final_state(self) -> StateVector:
        return StateVector.from_array(self.y[:, -1], self.tf)

    def state_at(self, epoch: Epoch) -> StateVector:
        t = (epoch.mjd_tdb - self.ref.mjd_tdb) * DAY
        lo = min(float(self.t_s[0]), float(self.t_s[-1]))
        hi = max(float(self.t_s[0]), float(self.t_s[-1]))
        if not lo - 1e-6 <= t <= hi + 1e-6:
            raise RangeError(f"epoch {epoch.mjd_tdb} outside trajectory span")
        if self._sol is None:
            return StateVector.from_array(self.y[:, 0], epoch)
        return StateVector.from_array(self._sol(min(max(t, lo), hi)), epoch)

    def sample(self, step_days: float) -> list:
        """States at a uniform cadence from t0 to tf inclusive."""
        if step_days <= 0.0:
            raise DomainError("step_days must be positive")
        d0 = self.t0.mjd_tdb
        d1 = self.tf.mjd_tdb
        sign = 1.0 if d1 >= d0 else -1.0
        out = []
        k = 0
        while True:
            d = d0 + sign * k * step_days
            if (d - d1) * sign >= 0.0:
                break
            out.append(self.state_at(Epoch(d)))
            k += 1
        out.append(self.state_at(Epoch(d1)))
        return out


def propagate(s0: StateVector, tf: Epoch,
              fcfg: ForceModelConfig = ForceModelConfig(),
              icfg: IntegratorConfig = DEFAULT_INTEGRATOR) -> Trajectory:
    """Propagate a state to epoch tf (forward or backward), densely."""
    dt = (tf.mjd_tdb - s0.epoch.mjd_tdb) * DAY
    if dt == 0.0:
        y = s0.as_array().reshape(6, 1)
        return Trajectory(s0.epoch, np.array([0.0]), y, None)
    rhs = make_rhs(fcfg, s0.epoch.mjd_tdb)
    sol = solve_ivp(rhs, (0.0, dt), s0.as_array(), method="DOP853",
                    rtol=icfg.rel_tol, atol=icfg.abs_tol,
                    max_step=icfg.max_step, dense_output=True)
    if not sol.success:
        raise StepSizeError(
            f"integration failed: {sol.message}",
            last_state=StateVector.from_array(
                sol.y[:, -1], s0.epoch.plus_seconds(float(sol.t[-1]))))
    return Trajectory(s0.epoch, sol.t, sol.y, sol.sol)


def find_event(s0: StateVector, tf: Epoch, g: Callable[[StateVector], float],
               fcfg: ForceModelConfig = ForceModelConfig(),
               icfg: IntegratorConfig = DEFAULT_INTEGRATOR):
    """First root of g along the propagation from s0 to tf.

    Returns (Epoch, StateVector) of the first sign change of g, or
    None when g never crosses zero in the span (a legitimate miss).
    """
    ref_mjd = s0.epoch.mjd_tdb
    dt = (tf.mjd_tdb - ref_mjd) * DAY
    if dt == 0.0:
        return None
    rhs = make_rhs(fcfg, ref_mjd)

    def event(t, y):
        return g(StateVector.from_array(y, Epoch(ref_mjd + t / DAY)))

    event.terminal = True
    sol = solve_ivp(rhs, (0.0, dt), s0.as_array(), method="DOP853",
                    rtol=icfg.rel_tol, atol=icfg.abs_tol,
                    max_step=icfg.max_step, dense_output=True, events=[event])
    if not sol.success:
        raise StepSizeError(
            f"integration failed: {sol.message}",
            last_state=StateVector.from_array(
                sol.y[:, -1], s0.epoch.plus_seconds(float(sol.t[-1]))))
    if len(sol.t_events[0]) == 0:
        return None
    te = float(sol.t_events[0][0])
    ye = sol.y_events[0][0]
    epoch = s0.epoch.plus_seconds(te)
    return epoch, StateVector.from_array(ye, epoch)
