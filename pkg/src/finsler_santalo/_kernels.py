"""Numba kernels for batched geodesic tracing to the boundary.

Only built-in combinations are compiled: metric codes 0 (Euclidean),
1 (Funk ball), 101 (reversed Funk ball); domain code 0 (ball); integrand codes
0 (one), 1 (coordinate of y), 2 (tilted Gaussian bump).  Everything else goes
through the numpy path in geodesics.py.
"""
import math

import numpy as np

from ._accel import HAVE_NUMBA

if HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

OK, RUNAWAY, LEFT_METRIC = 0, 1, 2


@njit(cache=True, inline="always")
def _funk_F(x, y, sgn):
    n = x.shape[0]
    xx = 0.0
    yy = 0.0
    xy = 0.0
    for i in range(n):
        xx += x[i] * x[i]
        yy += y[i] * y[i]
        xy += x[i] * y[i]
    d = 1.0 - xx
    return (math.sqrt(d * yy + xy * xy) + sgn * xy) / d


@njit(cache=True, inline="always")
def _F(code, x, y):
    if code == 0:
        s = 0.0
        for i in range(x.shape[0]):
            s += y[i] * y[i]
        return math.sqrt(s)
    if code == 1:
        return _funk_F(x, y, 1.0)
    return _funk_F(x, y, -1.0)


@njit(cache=True, inline="always")
def _accel_factor(code, x, v):
    """-2 G(x, v) = factor * v for every compiled family."""
    if code == 0:
        return 0.0
    if code == 1:
        return -_funk_F(x, v, 1.0)
    return _funk_F(x, v, -1.0)


@njit(cache=True, inline="always")
def _h(center, radius, x):
    s = 0.0
    for i in range(x.shape[0]):
        d = x[i] - center[i]
        s += d * d
    return (s - radius * radius) / (2.0 * radius)


@njit(cache=True, inline="always")
def _f(code, p, x, v):
    if code == 0:
        return 1.0
    if code == 1:
        return p[0] * v[int(p[1])]
    # bump: p = [ysign, w, tilt, c_0, ..., c_{n-1}]
    s = 0.0
    for i in range(x.shape[0]):
        d = x[i] - p[3 + i]
        s += d * d
    return math.exp(-s / (p[1] * p[1])) * (1.0 + p[2] * p[0] * v[0])


@njit(cache=True)
def _rk4(mcode, fcode, fp, x, v, dt, xo, vo, ws):
    """ws rows: 0-3 stage velocities, 4-7 stage accelerations, 8-9 trial state."""
    n = x.shape[0]
    isum = 0.0
    for i in range(n):
        ws[8, i] = x[i]
        ws[9, i] = v[i]
    for st in range(4):
        if st > 0:
            c = 0.5 * dt if st < 3 else dt
            for i in range(n):
                ws[8, i] = x[i] + c * ws[st - 1, i]
                ws[9, i] = v[i] + c * ws[st + 3, i]
        a = _accel_factor(mcode, ws[8], ws[9])
        for i in range(n):
            ws[st, i] = ws[9, i]
            ws[st + 4, i] = a * ws[9, i]
        isum += (1.0 if st == 0 or st == 3 else 2.0) * _f(fcode, fp, ws[8], ws[9])
    for i in range(n):
        xo[i] = x[i] + dt / 6.0 * (ws[0, i] + 2 * ws[1, i] + 2 * ws[2, i] + ws[3, i])
        vo[i] = v[i] + dt / 6.0 * (ws[4, i] + 2 * ws[5, i] + 2 * ws[6, i] + ws[7, i])
    return dt / 6.0 * isum


@njit(cache=True)
def _renorm(mcode, x, v):
    f = _F(mcode, x, v)
    for i in range(x.shape[0]):
        v[i] /= f


@njit(cache=True, nogil=True)
def trace_batch(mcode, center, radius, fcode, fp, X0, V0, dts, direction, t_max, bisect_iters):
    """Trace each (X0[k], V0[k]) until h >= 0.  dts[k] > 0 is the step size and
    direction = +1 / -1 selects forward / backward time."""
    B, n = X0.shape
    t_out = np.zeros(B)
    x_out = np.zeros((B, n))
    v_out = np.zeros((B, n))
    i_out = np.zeros(B)
    status = np.zeros(B, dtype=np.int64)
    ws = np.zeros((10, n))
    x = np.zeros(n)
    v = np.zeros(n)
    xn = np.zeros(n)
    vn = np.zeros(n)
    xb = np.zeros(n)
    vb = np.zeros(n)
    for k in range(B):
        for i in range(n):
            x[i] = X0[k, i]
            v[i] = V0[k, i]
        dt = dts[k] * direction
        t = 0.0
        acc = 0.0
        done = False
        while not done:
            inc = _rk4(mcode, fcode, fp, x, v, dt, xn, vn, ws)
            if mcode != 0:
                r2 = 0.0
                for i in range(n):
                    r2 += xn[i] * xn[i]
                if not r2 < 1.0:
                    status[k] = LEFT_METRIC
                    break
            if _h(center, radius, xn) >= 0.0:
                lo = 0.0
                hi = 1.0
                for _ in range(bisect_iters):
                    mid = 0.5 * (lo + hi)
                    _rk4(mcode, fcode, fp, x, v, mid * dt, xb, vb, ws)
                    if _h(center, radius, xb) < 0.0:
                        lo = mid
                    else:
                        hi = mid
                s = 0.5 * (lo + hi)
                inc = _rk4(mcode, fcode, fp, x, v, s * dt, xb, vb, ws)
                _renorm(mcode, xb, vb)
                t_out[k] = t + s * dts[k]
                i_out[k] = acc + direction * inc
                for i in range(n):
                    x_out[k, i] = xb[i]
                    v_out[k, i] = vb[i]
                done = True
            else:
                for i in range(n):
                    x[i] = xn[i]
                    v[i] = vn[i]
                _renorm(mcode, x, v)
                acc += direction * inc
                t += dts[k]
                if t > t_max:
                    status[k] = RUNAWAY
                    break
    return t_out, x_out, v_out, i_out, status
