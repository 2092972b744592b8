"""Shared construction helpers for the test suite."""

import math

import numpy as np

from slowpush.constants import AU, GM_SUN


def write_population_asc(path, lat_center, lon_center, half_deg=20.0,
                         cell=0.25, base=100.0, grad_per_deg=20.0):
    """Regional ESRI ASCII grid with a west-to-east density gradient."""
    n = int(round(2 * half_deg / cell))
    lon0 = lon_center - half_deg
    yll = lat_center - half_deg
    lines = [
        f"ncols {n}",
        f"nrows {n}",
        f"xllcorner {lon0}",
        f"yllcorner {yll}",
        f"cellsize {cell}",
        "NODATA_value -9999",
    ]
    for i in range(n):
        row = []
        for j in range(n):
            lon = lon0 + (j + 0.5) * cell
            row.append("%.4f" % (base + grad_per_deg * (lon - lon0)))
        lines.append(" ".join(row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_nightlight_pgm(path, width=720, height=360):
    """Global P5 nightlight image with a deterministic blocky pattern."""
    x = np.arange(width)
    y = np.arange(height)
    vals = ((x[None, :] * 7 + y[:, None] * 13) % 97 + 30).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(vals.tobytes())
    return path


def circular_orbit_state(a_m=AU, mu=GM_SUN):
    """Position/velocity of a circular orbit in the xy-plane at phase 0."""
    v = math.sqrt(mu / a_m)
    return np.array([a_m, 0.0, 0.0]), np.array([0.0, v, 0.0])


def analytic_circular_stm(a_m, dt_s, mu=GM_SUN):
    """Exact two-body state transition matrix around a circular orbit.

    Linearized relative motion about a circular orbit, solved in the
    rotating radial/along-track/cross-track frame, then mapped to the
    inertial frame.  Assumes the reference starts at (a, 0, 0) with
    velocity (0, v_circ, 0).
    """
    n = math.sqrt(mu / a_m ** 3)
    s, c = math.sin(n * dt_s), math.cos(n * dt_s)
    t = dt_s
    phi_rot = np.array([
        [4 - 3 * c, 0, 0, s / n, 2 * (1 - c) / n, 0],
        [6 * (s - n * t), 1, 0, -2 * (1 - c) / n, (4 * s - 3 * n * t) / n, 0],
        [0, 0, c, 0, 0, s / n],
        [3 * n * s, 0, 0, c, 2 * s, 0],
        [6 * n * (c - 1), 0, 0, -2 * s, 4 * c - 3, 0],
        [0, 0, -n * s, 0, 0, c],
    ])

    def frame_map(theta):
        # rotating axes (radial, along-track, cross) -> inertial, with
        # the omega-cross transport term on the velocity rows
        r_hat = np.array([math.cos(theta), math.sin(theta), 0.0])
        t_hat = np.array([-math.sin(theta), math.cos(theta), 0.0])
        z_hat = np.array([0.0, 0.0, 1.0])
        rot = np.column_stack((r_hat, t_hat, z_hat))
        w = np.array([[0.0, -n, 0.0], [n, 0.0, 0.0], [0.0, 0.0, 0.0]])
        m = np.zeros((6, 6))
        m[:3, :3] = rot
        m[3:, :3] = rot @ w
        m[3:, 3:] = rot
        return m

    m1 = frame_map(n * dt_s)
    m0 = frame_map(0.0)
    return m1 @ phi_rot @ np.linalg.inv(m0)
