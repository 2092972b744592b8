"""Compiled inner loops for the force model and analytic ephemerides.

Everything here is numba-jitted and allocation-light; the public
modules wrap these kernels with validated, typed interfaces.  Body
index order: 0-7 the planets Mercury..Neptune (2 = Earth), 8 the Moon,
9-11 Ceres, Vesta, Pallas.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _conic(a_m, e, inc, node, argp, m_anom, mu, out):
    # fixed-point start then Newton; e < 0.95 for every body handled here
    ecc_anom = m_anom + e * np.sin(m_anom)
    for _ in range(10):
        ecc_anom = ecc_anom - (ecc_anom - e * np.sin(ecc_anom) - m_anom) / (
            1.0 - e * np.cos(ecc_anom))
    c_e = np.cos(ecc_anom)
    s_e = np.sin(ecc_anom)
    boa = np.sqrt(1.0 - e * e)
    r = a_m * (1.0 - e * c_e)
    xp = a_m * (c_e - e)
    yp = a_m * boa * s_e
    n = np.sqrt(mu / (a_m * a_m * a_m))
    vxp = -a_m * a_m * n * s_e / r
    vyp = a_m * a_m * n * boa * c_e / r
    co = np.cos(argp)
    so = np.sin(argp)
    c_o = np.cos(node)
    s_o = np.sin(node)
    ci = np.cos(inc)
    si = np.sin(inc)
    r11 = c_o * co - s_o * so * ci
    r12 = -c_o * so - s_o * co * ci
    r21 = s_o * co + c_o * so * ci
    r22 = -s_o * so + c_o * co * ci
    r31 = so * si
    r32 = co * si
    out[0] = r11 * xp + r12 * yp
    out[1] = r21 * xp + r22 * yp
    out[2] = r31 * xp + r32 * yp
    out[3] = r11 * vxp + r12 * vyp
    out[4] = r21 * vxp + r22 * vyp
    out[5] = r31 * vxp + r32 * vyp


@njit(cache=True, nogil=True)
def _moon_geo(mjd, out):
    # truncated lunar theory: 3 leading periodic terms, geocentric ecliptic
    d = mjd - 51544.5
    rad = np.pi / 180.0
    l_bar = (218.316 + 13.176396 * d) * rad
    m_p = (134.963 + 13.064993 * d) * rad
    f = (93.272 + 13.229350 * d) * rad
    lam = l_bar + 6.289 * rad * np.sin(m_p)
    bet = 5.128 * rad * np.sin(f)
    r = (385001.0 - 20905.0 * np.cos(m_p)) * 1e3
    d_l = 13.176396 * rad / 86400.0
    d_mp = 13.064993 * rad / 86400.0
    d_f = 13.229350 * rad / 86400.0
    lamdot = d_l + 6.289 * rad * np.cos(m_p) * d_mp
    betdot = 5.128 * rad * np.cos(f) * d_f
    rdot = 20905e3 * np.sin(m_p) * d_mp
    cb = np.cos(bet)
    sb = np.sin(bet)
    cl = np.cos(lam)
    sl = np.sin(lam)
    out[0] = r * cb * cl
    out[1] = r * cb * sl
    out[2] = r * sb
    out[3] = rdot * cb * cl + r * (-lamdot * cb * sl - betdot * sb * cl)
    out[4] = rdot * cb * sl + r * (lamdot * cb * cl - betdot * sb * sl)
    out[5] = rdot * sb + r * betdot * cb


@njit(cache=True, nogil=True)
def _body_state(idx, mjd, el0, rate, ast_el, out):
    rad = np.pi / 180.0
    if idx <= 7 and idx != 2:
        t_cy = (mjd - 51544.5) / 36525.0
        a = (el0[idx, 0] + rate[idx, 0] * t_cy) * 1.495978707e11
        e = el0[idx, 1] + rate[idx, 1] * t_cy
        inc = (el0[idx, 2] + rate[idx, 2] * t_cy) * rad
        lon_mean = el0[idx, 3] + rate[idx, 3] * t_cy
        lon_peri = el0[idx, 4] + rate[idx, 4] * t_cy
        node = (el0[idx, 5] + rate[idx, 5] * t_cy) * rad
        argp = (lon_peri - (el0[idx, 5] + rate[idx, 5] * t_cy)) * rad
        m_anom = np.remainder((lon_mean - lon_peri) * rad + np.pi, 2 * np.pi) - np.pi
        _conic(a, e, inc, node, argp, m_anom, 1.32712440018e20, out)
    elif idx == 2 or idx == 8:
        t_cy = (mjd - 51544.5) / 36525.0
        a = (el0[2, 0] + rate[2, 0] * t_cy) * 1.495978707e11
        e = el0[2, 1] + rate[2, 1] * t_cy
        inc = (el0[2, 2] + rate[2, 2] * t_cy) * rad
        lon_mean = el0[2, 3] + rate[2, 3] * t_cy
        lon_peri = el0[2, 4] + rate[2, 4] * t_cy
        node = (el0[2, 5] + rate[2, 5] * t_cy) * rad
        argp = (lon_peri - (el0[2, 5] + rate[2, 5] * t_cy)) * rad
        m_anom = np.remainder((lon_mean - lon_peri) * rad + np.pi, 2 * np.pi) - np.pi
        emb = np.empty(6)
        _conic(a, e, inc, node, argp, m_anom, 1.32712440018e20, emb)
        geo = np.empty(6)
        _moon_geo(mjd, geo)
        f = 0.012150584269940354
        for i in range(6):
            out[i] = emb[i] - f * geo[i]
        if idx == 8:
            for i in range(6):
                out[i] += geo[i]
    else:
        k = idx - 9
        a = ast_el[k, 0] * 1.495978707e11
        e = ast_el[k, 1]
        n = np.sqrt(1.32712440018e20 / (a * a * a))
        m_anom = ast_el[k, 5] * rad + n * (mjd - 57000.0) * 86400.0
        m_anom = np.remainder(m_anom + np.pi, 2 * np.pi) - np.pi
        _conic(a, e, ast_el[k, 2] * rad, ast_el[k, 3] * rad, ast_el[k, 4] * rad,
               m_anom, 1.32712440018e20, out)


@njit(cache=True, nogil=True)
def _accel(t, y, ref_mjd, mask, rel_on, gm, el0, rate, ast_el, thr):
    # thr = [active, acc_1au, exponent, sign, start_mjd, end_mjd]
    mjd = ref_mjd + t / 86400.0
    rx = y[0]
    ry = y[1]
    rz = y[2]
    vx = y[3]
    vy = y[4]
    vz = y[5]
    rn2 = rx * rx + ry * ry + rz * rz
    rn = np.sqrt(rn2)
    mu = 1.32712440018e20
    f = -mu / (rn2 * rn)
    ax = f * rx
    ay = f * ry
    az = f * rz
    tmp = np.empty(6)
    for j in range(12):
        if mask[j]:
            _body_state(j, mjd, el0, rate, ast_el, tmp)
            dx = tmp[0] - rx
            dy = tmp[1] - ry
            dz = tmp[2] - rz
            dn2 = dx * dx + dy * dy + dz * dz
            dn3 = dn2 * np.sqrt(dn2)
            bn2 = tmp[0] * tmp[0] + tmp[1] * tmp[1] + tmp[2] * tmp[2]
            bn3 = bn2 * np.sqrt(bn2)
            g = gm[j]
            ax += g * (dx / dn3 - tmp[0] / bn3)
            ay += g * (dy / dn3 - tmp[1] / bn3)
            az += g * (dz / dn3 - tmp[2] / bn3)
    if rel_on:
        c2 = 299792458.0 ** 2
        v2 = vx * vx + vy * vy + vz * vz
        rv = rx * vx + ry * vy + rz * vz
        k = mu / (c2 * rn2 * rn)
        s = 4.0 * mu / rn - v2
        ax += k * (s * rx + 4.0 * rv * vx)
        ay += k * (s * ry + 4.0 * rv * vy)
        az += k * (s * rz + 4.0 * rv * vz)
    if thr[0] > 0.5 and thr[4] <= mjd < thr[5]:
        vn = np.sqrt(vx * vx + vy * vy + vz * vz)
        if vn > 0:
            am = thr[3] * thr[1] * (1.495978707e11 / rn) ** thr[2]
            ax += am * vx / vn
            ay += am * vy / vn
            az += am * vz / vn
    out = np.empty(6)
    out[0] = vx
    out[1] = vy
    out[2] = vz
    out[3] = ax
    out[4] = ay
    out[5] = az
    return out
