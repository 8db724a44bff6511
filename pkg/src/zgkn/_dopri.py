"""Compiled Dormand-Prince 5(4) integrator for planar autonomous-ish flows.

The right-hand side is a jitted function ``rhs(t, state, p) -> (dx, dy)``;
the integrator works in either time direction and records every accepted
step together with the derivative there (for Hermite interpolation).
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

OK = 0
MAX_STEPS = 1
STEP_UNDERFLOW = 2
NON_FINITE = 3

# Dormand-Prince tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth minus fourth order weights
_E1, _E3, _E4, _E5, _E6, _E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


@njit(cache=True)
def _grow(buf, n):
    out = np.empty((buf.shape[0], 2 * n))
    out[:, :n] = buf[:, :n]
    return out


@njit(cache=True)
def dopri(rhs, t0, x0, y0, t1, p, rtol, atol, hmax, maxsteps):
    """Integrate from t0 to t1 (either direction).

    Returns ``(buf, status)`` where ``buf`` has rows t, x, y, dx, dy.
    """
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    cap = 1024
    buf = np.empty((5, cap))
    st = np.empty(2)
    t = t0
    x = x0
    y = y0
    st[0] = x
    st[1] = y
    k1x, k1y = rhs(t, st, p)
    buf[0, 0] = t
    buf[1, 0] = x
    buf[2, 0] = y
    buf[3, 0] = k1x
    buf[4, 0] = k1y
    n = 0
    status = OK
    if not (math.isfinite(k1x) and math.isfinite(k1y)):
        return buf[:, :1], NON_FINITE
    h = 1e-3 * span
    if hmax > 0.0 and h > hmax:
        h = hmax
    if h <= 0.0:
        return buf[:, :1], OK
    while direction * (t1 - t) > 0.0:
        if n >= maxsteps:
            status = MAX_STEPS
            break
        rem = direction * (t1 - t)
        if h > rem:
            h = rem
        hs = direction * h
        st[0] = x + hs * _A21 * k1x
        st[1] = y + hs * _A21 * k1y
        k2x, k2y = rhs(t + _C2 * hs, st, p)
        st[0] = x + hs * (_A31 * k1x + _A32 * k2x)
        st[1] = y + hs * (_A31 * k1y + _A32 * k2y)
        k3x, k3y = rhs(t + _C3 * hs, st, p)
        st[0] = x + hs * (_A41 * k1x + _A42 * k2x + _A43 * k3x)
        st[1] = y + hs * (_A41 * k1y + _A42 * k2y + _A43 * k3y)
        k4x, k4y = rhs(t + _C4 * hs, st, p)
        st[0] = x + hs * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x)
        st[1] = y + hs * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y)
        k5x, k5y = rhs(t + _C5 * hs, st, p)
        st[0] = x + hs * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x)
        st[1] = y + hs * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y)
        k6x, k6y = rhs(t + hs, st, p)
        xn = x + hs * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
        yn = y + hs * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
        st[0] = xn
        st[1] = yn
        k7x, k7y = rhs(t + hs, st, p)
        ex = hs * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
        ey = hs * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
        sx = atol + rtol * max(abs(x), abs(xn))
        sy = atol + rtol * max(abs(y), abs(yn))
        err = math.sqrt(0.5 * ((ex / sx) ** 2 + (ey / sy) ** 2))
        if not math.isfinite(err):
            # non-finite trial: shrink and retry unless the step is already tiny
            h *= 0.2
            if h < 1e-14 * max(1.0, abs(t)):
                status = NON_FINITE
                break
            continue
        if err <= 1.0:
            t = t + hs
            x = xn
            y = yn
            n += 1
            if n >= buf.shape[1]:
                buf = _grow(buf, n)
            buf[0, n] = t
            buf[1, n] = x
            buf[2, n] = y
            buf[3, n] = k7x
            buf[4, n] = k7y
            k1x = k7x
            k1y = k7y
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h = h * fac
        if hmax > 0.0 and h > hmax:
            h = hmax
        if h < 1e-14 * max(1.0, abs(t)):
            status = STEP_UNDERFLOW
            break
    return buf[:, : n + 1], status
