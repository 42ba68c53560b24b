"""Compiled inner loops for the 1-D LLG chain.

Parameter vector layout (all CGS):
    p = [dx, H_K, 2A/Ms, 4 pi Ms, H_ext, b_J, gamma, alpha]
Pinning rows are [V0, zeta, x0]. Cells with index < nclamp or
>= n - nclamp are frozen.
"""

import numpy as np
from numba import njit

DX, HK, DEX, FPM, HEXT, BJ, GAMMA, ALPHA = range(8)


@njit(cache=True)
def rhs(m, out, xpos, p, pins, nclamp):
    n = m.shape[0]
    dx = p[DX]
    inv_dx2 = 1.0 / (dx * dx)
    inv_2dx = 0.5 / dx
    hk, dex, fpm, hext, b, g, a = p[HK], p[DEX], p[FPM], p[HEXT], p[BJ], p[GAMMA], p[ALPHA]
    pref = 1.0 / (1.0 + a * a)
    for i in range(n):
        if i < nclamp or i >= n - nclamp:
            out[i, 0] = 0.0
            out[i, 1] = 0.0
            out[i, 2] = 0.0
            continue
        mx, my, mz = m[i, 0], m[i, 1], m[i, 2]
        hpin = 0.0
        for k in range(pins.shape[0]):
            d = xpos[i] - pins[k, 2]
            if abs(d) < pins[k, 1]:
                hpin += pins[k, 0] * d / pins[k, 1]
        hx = hk * mx + dex * (m[i - 1, 0] - 2 * mx + m[i + 1, 0]) * inv_dx2 + hext + hpin
        hy = dex * (m[i - 1, 1] - 2 * my + m[i + 1, 1]) * inv_dx2
        hz = dex * (m[i - 1, 2] - 2 * mz + m[i + 1, 2]) * inv_dx2 - fpm * mz
        gx = (m[i + 1, 0] - m[i - 1, 0]) * inv_2dx
        gy = (m[i + 1, 1] - m[i - 1, 1]) * inv_2dx
        gz = (m[i + 1, 2] - m[i - 1, 2]) * inv_2dx
        # T = -gamma m x H - b m x (m x dm/dx)
        mdotg = mx * gx + my * gy + mz * gz
        mm = mx * mx + my * my + mz * mz
        tx = -g * (my * hz - mz * hy) + b * (gx * mm - mx * mdotg)
        ty = -g * (mz * hx - mx * hz) + b * (gy * mm - my * mdotg)
        tz = -g * (mx * hy - my * hx) + b * (gz * mm - mz * mdotg)
        out[i, 0] = pref * (tx + a * (my * tz - mz * ty))
        out[i, 1] = pref * (ty + a * (mz * tx - mx * tz))
        out[i, 2] = pref * (tz + a * (mx * ty - my * tx))


@njit(cache=True)
def _renormalize(m, nclamp):
    """Normalize every cell; return the largest | |m| - 1 | seen before."""
    n = m.shape[0]
    worst = 0.0
    for i in range(nclamp, n - nclamp):
        r = np.sqrt(m[i, 0] ** 2 + m[i, 1] ** 2 + m[i, 2] ** 2)
        dev = abs(r - 1.0)
        if not dev <= worst:  # also catches nan
            worst = dev if np.isfinite(dev) else np.inf
        m[i, 0] /= r
        m[i, 1] /= r
        m[i, 2] /= r
    return worst


@njit(cache=True)
def rk4_steps(m, nsteps, h, xpos, p, pins, nclamp, renorm, F):
    """Advance ``m`` in place by ``nsteps`` RK4 steps.

    ``F`` (shape (4, n, 3)) receives f at the final state in F[0] with the
    older values shifted down, which seeds the multistep history.
    Returns the largest norm drift observed.
    """
    n = m.shape[0]
    k1 = np.empty_like(m)
    k2 = np.empty_like(m)
    k3 = np.empty_like(m)
    k4 = np.empty_like(m)
    tmp = np.empty_like(m)
    worst = 0.0
    for _ in range(nsteps):
        rhs(m, k1, xpos, p, pins, nclamp)
        for i in range(n):
            for c in range(3):
                tmp[i, c] = m[i, c] + 0.5 * h * k1[i, c]
        rhs(tmp, k2, xpos, p, pins, nclamp)
        for i in range(n):
            for c in range(3):
                tmp[i, c] = m[i, c] + 0.5 * h * k2[i, c]
        rhs(tmp, k3, xpos, p, pins, nclamp)
        for i in range(n):
            for c in range(3):
                tmp[i, c] = m[i, c] + h * k3[i, c]
        rhs(tmp, k4, xpos, p, pins, nclamp)
        for i in range(n):
            for c in range(3):
                m[i, c] += h / 6.0 * (k1[i, c] + 2 * k2[i, c] + 2 * k3[i, c] + k4[i, c])
        if renorm:
            d = _renormalize(m, nclamp)
            if not d <= worst:
                worst = d
            if worst > 1e-3:
                return worst
        for j in range(3, 0, -1):
            F[j] = F[j - 1]
        rhs(m, F[0], xpos, p, pins, nclamp)
    return worst


@njit(cache=True)
def abm4_steps(m, nsteps, h, xpos, p, pins, nclamp, renorm, F):
    """Adams-Bashforth-Moulton PECE, 4th order, with history in F.

    F[0..3] hold f_n, f_{n-1}, f_{n-2}, f_{n-3} for the current m.
    """
    n = m.shape[0]
    y = np.empty_like(m)
    fp = np.empty_like(m)
    worst = 0.0
    c = h / 24.0
    for _ in range(nsteps):
        for i in range(n):
            for k in range(3):
                y[i, k] = m[i, k] + c * (55 * F[0, i, k] - 59 * F[1, i, k]
                                         + 37 * F[2, i, k] - 9 * F[3, i, k])
        rhs(y, fp, xpos, p, pins, nclamp)
        for i in range(n):
            for k in range(3):
                m[i, k] += c * (9 * fp[i, k] + 19 * F[0, i, k] - 5 * F[1, i, k] + F[2, i, k])
        if renorm:
            d = _renormalize(m, nclamp)
            if not d <= worst:
                worst = d
            if worst > 1e-3:
                return worst
        for j in range(3, 0, -1):
            F[j] = F[j - 1]
        rhs(m, F[0], xpos, p, pins, nclamp)
    return worst
