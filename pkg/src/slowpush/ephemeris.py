"""Heliocentric states of the planets, the Moon, and the big-three asteroids.

The built-in analytic model uses mean Keplerian elements with linear
secular rates (per Julian century) for the eight planets, a truncated
analytic lunar theory for the Moon, and fixed conic elements for
Ceres, Vesta, and Pallas.  Accuracy is thousands of km for the
planets, which is enough because encounter work re-anchors the epoch
by scanning.  A CSV-backed table source with 8th-order Lagrange
interpolation is available when higher fidelity states are supplied
externally.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .constants import (
    C_LIGHT,
    GM_CERES,
    GM_EARTH,
    GM_JUPITER,
    GM_MARS,
    GM_MERCURY,
    GM_MOON,
    GM_NEPTUNE,
    GM_PALLAS,
    GM_SATURN,
    GM_SUN,
    GM_URANUS,
    GM_VENUS,
    GM_VESTA,
    KERNEL_GM,
)
from .elements import StateVector
from .errors import DomainError, FormatError, RangeError
from .timeframes import Epoch

__all__ = [
    "AnalyticEphemeris",
    "Body",
    "C_LIGHT",
    "EphemerisTable",
    "GM",
    "TabulatedEphemeris",
    "body_state",
    "load_ephemeris_table",
]


class Body(enum.Enum):
    """Solar-system bodies known to the force model.

    Values of the planets, Moon, and asteroids are their indices in
    the compiled ephemeris kernel; the Sun is the central body.
    """

    MERCURY = 0
    VENUS = 1
    EARTH = 2
    MARS = 3
    JUPITER = 4
    SATURN = 5
    URANUS = 6
    NEPTUNE = 7
    MOON = 8
    CERES = 9
    VESTA = 10
    PALLAS = 11
    SUN = -1

    @property
    def gm(self) -> float:
        return GM[self]


GM = {
    Body.SUN: GM_SUN,
    Body.MERCURY: GM_MERCURY,
    Body.VENUS: GM_VENUS,
    Body.EARTH: GM_EARTH,
    Body.MARS: GM_MARS,
    Body.JUPITER: GM_JUPITER,
    Body.SATURN: GM_SATURN,
    Body.URANUS: GM_URANUS,
    Body.NEPTUNE: GM_NEPTUNE,
    Body.MOON: GM_MOON,
    Body.CERES: GM_CERES,
    Body.VESTA: GM_VESTA,
    Body.PALLAS: GM_PALLAS,
}

DEFAULT_PERTURBERS = frozenset(b for b in Body if b is not Body.SUN)

# Mean elements at J2000 and linear rates per Julian century:
# a (AU), e, i (deg), mean longitude (deg), perihelion longitude (deg),
# node (deg).  Rows: Mercury..Neptune; the Earth row is the Earth-Moon
# barycenter, split into Earth and Moon with the lunar theory.
PLANET_EL0 = np.array([
    [0.38709927, 0.20563593, 7.00497902, 252.25032350, 77.45779628, 48.33076593],
    [0.72333566, 0.00677672, 3.39467605, 181.97909950, 131.60246718, 76.67984255],
    [1.00000261, 0.01671123, -0.00001531, 100.46457166, 102.93768193, 0.0],
    [1.52371034, 0.09339410, 1.84969142, -4.55343205, -23.94362959, 49.55953891],
    [5.20288700, 0.04838624, 1.30439695, 34.39644051, 14.72847983, 100.47390909],
    [9.53667594, 0.05386179, 2.48599187, 49.95424423, 92.59887831, 113.66242448],
    [19.18916464, 0.04725744, 0.77263783, 313.23810451, 170.95427630, 74.01692503],
    [30.06992276, 0.00859048, 1.77004347, -55.12002969, 44.96476227, 131.78422574],
])
PLANET_RATE = np.array([
    [0.00000037, 0.00001906, -0.00594749, 149472.67411175, 0.16047689, -0.12534081],
    [0.00000390, -0.00004107, -0.00078890, 58517.81538729, 0.00268329, -0.27769418],
    [0.00000562, -0.00004392, -0.01294668, 35999.37244981, 0.32327364, 0.0],
    [0.00001847, 0.00007882, -0.00813131, 19140.30268499, 0.44441088, -0.29257343],
    [-0.00011607, -0.00013253, -0.00183714, 3034.74612775, 0.21252668, 0.20469106],
    [-0.00125060, -0.00050991, 0.00193609, 1222.49362201, -0.41897216, -0.28867794],
    [-0.00196176, -0.00004397, -0.00242939, 428.48202785, 0.40805281, 0.04240589],
    [0.00026291, 0.00005105, 0.00035372, 218.45945325, -0.32241464, -0.00508664],
])

# Fixed conics for Ceres, Vesta, Pallas: a (AU), e, i, node, argp,
# mean anomaly (deg) at the asteroid reference epoch.
ASTEROID_EL = np.array([
    [2.76754, 0.075823, 10.59341, 80.3293, 72.52203, 95.98917],
    [2.36179, 0.0887218, 7.14043, 103.85136, 151.19853, 20.86384],
    [2.77160, 0.2313372, 34.84099, 173.09625, 309.93026, 78.22873],
])
ASTEROID_EPOCH_MJD = 57000.0


def kernel_state(idx: int, mjd: float) -> np.ndarray:
    """Raw 6-vector state from the compiled analytic model."""
    out = np.empty(6)
    _kernels._body_state(idx, mjd, PLANET_EL0, PLANET_RATE, ASTEROID_EL, out)
    return out


class AnalyticEphemeris:
    """Built-in analytic ephemeris source."""

    def state(self, body: Body, epoch: Epoch) -> StateVector:
        if not isinstance(body, Body):
            raise DomainError(f"unknown body: {body!r}")
        if body is Body.SUN:
            return StateVector.from_array(np.zeros(6), epoch)
        y = kernel_state(body.value, epoch.mjd_tdb)
        return StateVector.from_array(y, epoch)


@dataclass(frozen=True)
class EphemerisTable:
    """Sampled states of one body with 8th-order Lagrange interpolation."""

    body: Body
    epochs_mjd: np.ndarray          # strictly increasing, >= 9 samples
    states: np.ndarray              # shape (n, 6)

    def __post_init__(self):
        ep = np.asarray(self.epochs_mjd, dtype=float)
        st = np.asarray(self.states, dtype=float)
        if ep.ndim != 1 or st.shape != (ep.size, 6):
            raise FormatError("table shape mismatch")
        if ep.size < 9:
            raise FormatError(
                f"table for {self.body.name} has {ep.size} samples, need at least 9")
        if not np.all(np.diff(ep) > 0):
            raise FormatError(f"table epochs for {self.body.name} not strictly increasing")
        if not (np.all(np.isfinite(ep)) and np.all(np.isfinite(st))):
            raise FormatError(f"non-finite entries in table for {self.body.name}")
        object.__setattr__(self, "epochs_mjd", ep)
        object.__setattr__(self, "states", st)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.epochs_mjd[0]), float(self.epochs_mjd[-1])

    def state_array(self, mjd: float) -> np.ndarray:
        lo, hi = self.span
        if not (lo <= mjd <= hi):
            raise RangeError(
                f"epoch {mjd} outside table span [{lo}, {hi}] for {self.body.name}")
        ep = self.epochs_mjd
        i = int(np.searchsorted(ep, mjd))
        start = min(max(i - 4, 0), ep.size - 9)
        t = ep[start:start + 9]
        y = self.states[start:start + 9]
        out = np.zeros(6)
        for j in range(9):
            w = 1.0
            for m in range(9):
                if m != j:
                    w *= (mjd - t[m]) / (t[j] - t[m])
            out += w * y[j]
        return out

    def state(self, epoch: Epoch) -> StateVector:
        return StateVector.from_array(self.state_array(epoch.mjd_tdb), epoch)


_TABLE_HEADER = ["body", "mjd_tdb", "x_m", "y_m", "z_m", "vx_ms", "vy_ms", "vz_ms"]


@dataclass
class TabulatedEphemeris:
    """Table-backed source; bodies without a table fall back to the analytic model."""

    tables: dict = field(default_factory=dict)
    _analytic: AnalyticEphemeris = field(default_factory=AnalyticEphemeris)

    def state(self, body: Body, epoch: Epoch) -> StateVector:
        if body in self.tables:
            return self.tables[body].state(epoch)
        return self._analytic.state(body, epoch)


def load_ephemeris_table(path) -> TabulatedEphemeris:
    """Parse a state-table CSV into a tabulated ephemeris source.

    Format: header `body,mjd_tdb,x_m,y_m,z_m,vx_ms,vy_ms,vz_ms`, one
    sampled state per row; rows of one body must appear in strictly
    increasing epoch order.
    """
    rows: dict[Body, list] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if [c.strip() for c in header.strip().split(",")] != _TABLE_HEADER:
            raise FormatError(f"{path}:1: expected header {','.join(_TABLE_HEADER)}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = [c.strip() for c in line.split(",")]
            if len(parts) != 8:
                raise FormatError(f"{path}:{lineno}: expected 8 columns, got {len(parts)}")
            name = parts[0].upper()
            try:
                body = Body[name]
            except KeyError:
                raise FormatError(f"{path}:{lineno}: unknown body {parts[0]!r}") from None
            try:
                vals = [float(p) for p in parts[1:]]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            rows.setdefault(body, []).append((lineno, vals))
    tables = {}
    for body, entries in rows.items():
        epochs = np.array([e[1][0] for e in entries])
        diffs = np.diff(epochs)
        if np.any(diffs == 0):
            dup = entries[int(np.where(diffs == 0)[0][0]) + 1][0]
            raise FormatError(f"{path}:{dup}: duplicate epoch for {body.name}")
        if np.any(diffs < 0):
            bad = entries[int(np.where(diffs < 0)[0][0]) + 1][0]
            raise FormatError(f"{path}:{bad}: epochs for {body.name} not increasing")
        states = np.array([e[1][1:] for e in entries])
        tables[body] = EphemerisTable(body, epochs, states)
    return TabulatedEphemeris(tables)


_ANALYTIC = AnalyticEphemeris()


def body_state(body: Body, epoch: Epoch, source=None) -> StateVector:
    """Heliocentric ecliptic J2000 state of a body.

    `source` is an AnalyticEphemeris or TabulatedEphemeris; None means
    the built-in analytic model.
    """
    src = source if source is not None else _ANALYTIC
    return src.state(body, epoch)
