"""Orbit-uncertainty propagation and its projection onto the Earth surface.

The post-rendezvous orbit-determination covariance is diagonal in the
Frenet axes of the asteroid orbit (tangential, normal, binormal).  It
is carried to later epochs with finite-difference state transition
matrices of the full nonlinear flow, and projected to a surface
ellipse by differencing the nonlinear impact-point mapping itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._parallel import ordered_map
from .constants import DAY, R_MEAN_KM
from .dynamics import (
    DEFAULT_INTEGRATOR,
    ForceModelConfig,
    IntegratorConfig,
    propagate,
)
from .elements import StateVector
from .errors import ConditioningError, DomainError, JacobianStepError, SlowpushError
from .impact import ImpactRecord, impact_from_state
from .timeframes import Epoch, GeodeticPoint

__all__ = [
    "CovarianceMatrix",
    "FrenetFrame",
    "SurfaceEllipse",
    "impact_ellipse",
    "propagate_covariance",
    "rendezvous_covariance",
    "state_transition",
]

# finite-difference steps per axis: 10 km in position, 1 mm/s in velocity
FD_STEP_POS_M = 1.0e4
FD_STEP_VEL_MS = 1.0e-3


@dataclass(frozen=True)
class FrenetFrame:
    """Trajectory-attached axes: x tangential, z binormal, y completes."""

    origin: StateVector
    axes: np.ndarray               # rows = unit axes in inertial coordinates

    def __post_init__(self):
        ax = np.asarray(self.axes, dtype=float)
        if ax.shape != (3, 3):
            raise DomainError("axes must be 3x3")
        if not np.allclose(ax @ ax.T, np.eye(3), atol=1e-14):
            raise DomainError("axes must be orthonormal")
        object.__setattr__(self, "axes", ax)

    @classmethod
    def from_state(cls, s: StateVector) -> "FrenetFrame":
        v = s.v / np.linalg.norm(s.v)
        h = np.cross(s.r, s.v)
        z = h / np.linalg.norm(h)
        y = np.cross(z, v)
        return cls(s, np.vstack((v, y, z)))

    def axis(self, i: int) -> np.ndarray:
        return self.axes[i]


@dataclass(frozen=True)
class CovarianceMatrix:
    """6x6 state covariance with a frame tag."""

    matrix: np.ndarray
    frame: str = "inertial"        # "frenet" or "inertial"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (6, 6):
            raise DomainError("covariance must be 6x6")
        scale = float(np.abs(m).max()) or 1.0
        if float(np.abs(m - m.T).max()) > 1e-12 * scale:
            raise ConditioningError("covariance not symmetric")
        eig = np.linalg.eigvalsh(0.5 * (m + m.T))
        if eig[0] < -1e-9 * float(np.trace(m)):
            raise ConditioningError(f"covariance not PSD (min eigenvalue {eig[0]:g})")
        object.__setattr__(self, "matrix", 0.5 * (m + m.T))

    @property
    def position_sigma_max_m(self) -> float:
        w = np.linalg.eigvalsh(self.matrix[:3, :3])
        return math.sqrt(max(float(w[-1]), 0.0))


@dataclass(frozen=True)
class SurfaceEllipse:
    """Uncertainty ellipse on the ground around the nominal impact point."""

    center: GeodeticPoint
    semi_major_km: float
    semi_minor_km: float
    azimuth_deg: float             # major axis, clockwise from north, [0, 180)
    sigma_level: float

    def __post_init__(self):
        if not self.semi_major_km >= self.semi_minor_km >= 0.0:
            raise DomainError("need semi-major >= semi-minor >= 0")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("lat,lon,smaj_km,smin_km,azimuth_deg,sigma\n")
            fh.write("%.6f,%.6f,%.6f,%.6f,%.4f,%.6g\n" % (
                self.center.lat_deg, self.center.lon_deg, self.semi_major_km,
                self.semi_minor_km, self.azimuth_deg, self.sigma_level))

    def polygon(self, n: int = 64) -> list:
        """Ellipse outline as (lon, lat) pairs, local tangent-plane geometry."""
        km_per_deg = math.pi / 180.0 * R_MEAN_KM
        az = math.radians(self.azimuth_deg)
        # unit vectors of the axes in (east, north) components
        maj = (math.sin(az), math.cos(az))
        mnr = (math.cos(az), -math.sin(az))
        lat0 = self.center.lat_deg
        lon0 = self.center.lon_deg
        cos_lat = math.cos(math.radians(lat0))
        pts = []
        for i in range(n):
            th = 2.0 * math.pi * i / n
            e = self.semi_major_km * math.cos(th) * maj[0] + \
                self.semi_minor_km * math.sin(th) * mnr[0]
            nn = self.semi_major_km * math.cos(th) * maj[1] + \
                self.semi_minor_km * math.sin(th) * mnr[1]
            pts.append([round(lon0 + e / (km_per_deg * cos_lat), 6),
                        round(lat0 + nn / km_per_deg, 6)])
        pts.append(pts[0])
        return pts

    def to_geojson(self, path, n: int = 64) -> None:
        import json
        obj = {
            "type": "FeatureCollection",
            "features": [{
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [self.polygon(n)]},
                "properties": {
                    "smaj_km": round(self.semi_major_km, 6),
                    "smin_km": round(self.semi_minor_km, 6),
                    "azimuth_deg": round(self.azimuth_deg, 4),
                    "sigma": self.sigma_level,
                },
            }],
        }
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(obj, fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")


def rendezvous_covariance() -> CovarianceMatrix:
    """Expected 1-sigma post-rendezvous orbit-determination covariance.

    Diagonal in the Frenet axes: 3.6 km tangential, 150 m normal,
    400 m binormal; 0.2 / 0.01 / 0.05 mm/s in the matching velocity
    components.
    """
    sig = np.array([3600.0, 150.0, 400.0, 2e-4, 1e-5, 5e-5])
    return CovarianceMatrix(np.diag(sig ** 2), frame="frenet")


def _fd_steps() -> np.ndarray:
    return np.array([FD_STEP_POS_M] * 3 + [FD_STEP_VEL_MS] * 3)


def _perturbed_state(s0: StateVector, axis_idx: int, step: float,
                     frame: Optional[FrenetFrame]) -> StateVector:
    y = s0.as_array().copy()
    if frame is None:
        unit = np.zeros(3)
        unit[axis_idx % 3] = 1.0
    else:
        unit = frame.axis(axis_idx % 3)
    if axis_idx < 3:
        y[:3] += step * unit
    else:
        y[3:] += step * unit
    return StateVector.from_array(y, s0.epoch)


def state_transition(s0: StateVector, tf: Epoch,
                     fcfg: ForceModelConfig = ForceModelConfig(),
                     icfg: IntegratorConfig = DEFAULT_INTEGRATOR,
                     frame: Optional[FrenetFrame] = None,
                     max_workers: Optional[int] = None) -> np.ndarray:
    """State transition matrix over [s0.epoch, tf] by central differences.

    Twelve perturbed propagations, one +/- pair per axis.  With a
    FrenetFrame given, deviations are taken and expressed along those
    fixed axes at both ends, so the identity check at tf = t0 holds in
    any frame.
    """
    h = _fd_steps()

    def flow(col: int):
        sign = +1.0 if col % 2 == 0 else -1.0
        axis = col // 2
        try:
            sp = _perturbed_state(s0, axis, sign * h[axis], frame)
            return propagate(sp, tf, fcfg, icfg).final_state.as_array()
        except SlowpushError as exc:
            raise SlowpushError(f"perturbed propagation failed on axis {axis}: {exc}")

    ends = ordered_map(flow, range(12), max_workers)
    phi = np.empty((6, 6))
    for axis in range(6):
        phi[:, axis] = (ends[2 * axis] - ends[2 * axis + 1]) / (2.0 * h[axis])
    if frame is not None:
        # columns are already frame-axis inputs; express the output
        # deviations in the same axes so the identity check holds
        rot = np.zeros((6, 6))
        rot[:3, :3] = frame.axes
        rot[3:, 3:] = frame.axes
        phi = rot @ phi
    return phi


def propagate_covariance(p0: CovarianceMatrix, s0: StateVector, tf: Epoch,
                         fcfg: ForceModelConfig = ForceModelConfig(),
                         icfg: IntegratorConfig = DEFAULT_INTEGRATOR,
                         frame: Optional[FrenetFrame] = None,
                         checkpoint_days: float = 30.0,
                         max_workers: Optional[int] = None):
    """Linear covariance propagation with a largest-position-sigma history.

    Runs the 12 perturbed trajectories once, densely, and assembles
    the state transition matrix at every checkpoint from the same
    runs.  Returns (final CovarianceMatrix, history) where history is
    a list of (Epoch, sigma_max_position_m) at checkpoints and tf.
    """
    if frame is None and p0.frame == "frenet":
        frame = FrenetFrame.from_state(s0)
    h = _fd_steps()

    def flow(col: int):
        sign = +1.0 if col % 2 == 0 else -1.0
        axis = col // 2
        try:
            sp = _perturbed_state(s0, axis, sign * h[axis], frame)
            return propagate(sp, tf, fcfg, icfg)
        except SlowpushError as exc:
            raise SlowpushError(f"perturbed propagation failed on axis {axis}: {exc}")

    if checkpoint_days <= 0.0:
        raise DomainError("checkpoint_days must be positive")
    trajs = ordered_map(flow, range(12), max_workers)
    t0 = s0.epoch.mjd_tdb
    span = tf.mjd_tdb - t0
    n_checks = int(abs(span) / checkpoint_days + 1e-12)
    sign = 1.0 if span >= 0 else -1.0
    checkpoints = [Epoch(t0 + sign * k * checkpoint_days) for k in range(1, n_checks + 1)]
    if checkpoints and abs(checkpoints[-1].mjd_tdb - tf.mjd_tdb) < 1e-9:
        checkpoints[-1] = tf
    else:
        checkpoints.append(tf)

    rot = np.zeros((6, 6))
    if frame is not None:
        rot[:3, :3] = frame.axes
        rot[3:, 3:] = frame.axes

    history = [(s0.epoch, p0.position_sigma_max_m)]
    p_final = None
    for ck in checkpoints:
        phi = np.empty((6, 6))
        for axis in range(6):
            yp = trajs[2 * axis].state_at(ck).as_array()
            ym = trajs[2 * axis + 1].state_at(ck).as_array()
            phi[:, axis] = (yp - ym) / (2.0 * h[axis])
        if frame is not None:
            phi = rot @ phi
        p = phi @ p0.matrix @ phi.T
        p = 0.5 * (p + p.T)
        cov = CovarianceMatrix(p, frame=p0.frame)
        history.append((ck, cov.position_sigma_max_m))
        p_final = cov
    return p_final, history


def impact_ellipse(p0: CovarianceMatrix, s0: StateVector,
                   fcfg: ForceModelConfig = ForceModelConfig(),
                   icfg: IntegratorConfig = DEFAULT_INTEGRATOR,
                   sigma_level: float = 1.0,
                   frame: Optional[FrenetFrame] = None,
                   horizon_days: float = 1200.0,
                   max_workers: Optional[int] = None) -> SurfaceEllipse:
    """Project state uncertainty at s0 onto the surface impact point.

    Central differences of the full nonlinear impact mapping give a
    2x6 Jacobian of (east, north) displacement; the surface covariance
    is its sandwich with p0.  Axes whose perturbed case misses Earth
    get their step halved, at most four times.
    """
    if sigma_level <= 0.0:
        raise DomainError("sigma_level must be positive")
    if frame is None and p0.frame == "frenet":
        frame = FrenetFrame.from_state(s0)
    nominal = impact_from_state(s0, fcfg, icfg, horizon_days)
    if not isinstance(nominal, ImpactRecord):
        raise DomainError("nominal trajectory does not impact; no ellipse exists")
    lat0 = nominal.point.lat_deg
    lon0 = nominal.point.lon_deg
    cos_lat = math.cos(math.radians(lat0))
    km_per_deg = math.pi / 180.0 * R_MEAN_KM
    base_steps = _fd_steps()

    def impact_point(axis: int, step: float):
        sp = _perturbed_state(s0, axis, step, frame)
        rec = impact_from_state(sp, fcfg, icfg, horizon_days)
        return rec if isinstance(rec, ImpactRecord) else None

    def column(axis: int):
        step = base_steps[axis]
        for _ in range(5):
            plus = impact_point(axis, +step)
            minus = impact_point(axis, -step)
            if plus is not None and minus is not None:
                d_north = (plus.point.lat_deg - minus.point.lat_deg) * km_per_deg
                d_east = ((plus.point.lon_deg - minus.point.lon_deg + 540.0) % 360.0
                          - 180.0) * km_per_deg * cos_lat
                return np.array([d_east, d_north]) * 1e3 / (2.0 * step)
            step *= 0.5
        raise JacobianStepError(
            f"perturbed impact keeps missing Earth on axis {axis}")

    cols = ordered_map(column, range(6), max_workers)
    jac = np.column_stack(cols)            # m of surface motion per unit deviation
    cov_km2 = jac @ p0.matrix @ jac.T / 1e6
    w, vecs = np.linalg.eigh(cov_km2)
    smaj = sigma_level * math.sqrt(max(float(w[1]), 0.0))
    smin = sigma_level * math.sqrt(max(float(w[0]), 0.0))
    vmaj = vecs[:, 1]                      # (east, north)
    azimuth = (math.degrees(math.atan2(vmaj[0], vmaj[1])) + 360.0) % 180.0
    return SurfaceEllipse(nominal.point, smaj, smin, azimuth, sigma_level)
