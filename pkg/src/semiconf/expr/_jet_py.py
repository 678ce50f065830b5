"""Pure numpy evaluation of second-order jets over a tape.

Vectorized across points; the instruction loop runs in Python.  Selected
automatically when the compiled kernel is unavailable.
"""
import numpy as np

from .tape import (ADD, CONST, DIV, MUL, NEG, POLE_TOL, POWI, POWR, SUB, UNARY, VAR)

_SIN, _COS, _TAN, _ATAN, _TANH, _SINH, _COSH, _EXP, _LOG, _SQRT, _ABS = (
    UNARY[k] for k in ("sin", "cos", "tan", "atan", "tanh", "sinh", "cosh", "exp",
                       "log", "sqrt", "abs")
)


def _unary(op, x, c):
    """Value, first and second derivative of the unary op at ``x``, plus a bad-point mask."""
    bad = np.zeros(x.shape, dtype=bool)
    if op == _SIN:
        s, co = np.sin(x), np.cos(x)
        return s, co, -s, bad
    if op == _COS:
        s, co = np.sin(x), np.cos(x)
        return co, -s, -co, bad
    if op == _TAN:
        bad = np.abs(np.cos(x)) < POLE_TOL
        t = np.tan(x)
        sec2 = 1.0 + t * t
        return t, sec2, 2.0 * t * sec2, bad
    if op == _ATAN:
        r = 1.0 / (1.0 + x * x)
        return np.arctan(x), r, -2.0 * x * r * r, bad
    if op == _TANH:
        t = np.tanh(x)
        s = 1.0 - t * t
        return t, s, -2.0 * t * s, bad
    if op == _SINH:
        s, ch = np.sinh(x), np.cosh(x)
        return s, ch, s, bad
    if op == _COSH:
        s, ch = np.sinh(x), np.cosh(x)
        return ch, s, ch, bad
    if op == _EXP:
        e = np.exp(x)
        return e, e, e, bad
    if op == _LOG:
        bad = ~(x > 0)
        r = 1.0 / x
        return np.log(x), r, -r * r, bad
    if op == _SQRT:
        bad = ~(x > 0)
        r = np.sqrt(x)
        return r, 0.5 / r, -0.25 / (r * x), bad
    if op == _ABS:
        bad = x == 0
        s = np.sign(x)
        return np.abs(x), s, np.zeros_like(x), bad
    if op == POWI:
        k = c
        if k == 0:
            return np.ones_like(x), np.zeros_like(x), np.zeros_like(x), bad
        if k == 1:
            return x.copy(), np.ones_like(x), np.zeros_like(x), bad
        if k == 2:
            return x * x, 2.0 * x, np.full_like(x, 2.0), bad
        if k < 0:
            bad = x == 0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            r = x ** (k - 2)
        return r * x * x, k * r * x, k * (k - 1) * r, bad
    if op == POWR:
        bad = (x < 0) | ((x == 0) & (c < 2))
        d2 = c * (c - 1) * x ** (c - 2)
        return x ** c, c * x ** (c - 1), d2, bad
    raise ValueError(f"unknown opcode {op}")


def eval_tape(op, a, b, c, outputs, nvars, points):
    points = np.ascontiguousarray(points, dtype=np.float64)
    npts = points.shape[0]
    m = nvars
    iu, ju = np.triu_indices(m)
    K = len(iu)
    L = len(op)
    val = [None] * L
    grd = [None] * L
    hes = [None] * L
    fail = np.full(npts, -1, dtype=np.int32)

    with np.errstate(all="ignore"):
        for s in range(L):
            o = op[s]
            if o == CONST:
                v = np.full(npts, c[s])
                g = np.zeros((npts, m))
                h = np.zeros((npts, K))
            elif o == VAR:
                v = points[:, a[s]].copy()
                g = np.zeros((npts, m))
                g[:, a[s]] = 1.0
                h = np.zeros((npts, K))
            elif o in (ADD, SUB):
                sign = 1.0 if o == ADD else -1.0
                x, y = a[s], b[s]
                v = val[x] + sign * val[y]
                g = grd[x] + sign * grd[y]
                h = hes[x] + sign * hes[y]
            elif o == NEG:
                x = a[s]
                v, g, h = -val[x], -grd[x], -hes[x]
            elif o == MUL:
                x, y = a[s], b[s]
                vx, vy, gx, gy = val[x], val[y], grd[x], grd[y]
                v = vx * vy
                g = vx[:, None] * gy + vy[:, None] * gx
                h = (vx[:, None] * hes[y] + vy[:, None] * hes[x]
                     + gx[:, iu] * gy[:, ju] + gy[:, iu] * gx[:, ju])
            elif o == DIV:
                x, y = a[s], b[s]
                vy, gy = val[y], grd[y]
                bad = vy == 0
                fail[bad & (fail < 0)] = s
                v = val[x] / vy
                g = (grd[x] - v[:, None] * gy) / vy[:, None]
                h = (hes[x] - v[:, None] * hes[y] - g[:, iu] * gy[:, ju]
                     - gy[:, iu] * g[:, ju]) / vy[:, None]
            else:
                x = a[s]
                d0, d1, d2, bad = _unary(o, val[x], c[s])
                bad = bad | ~np.isfinite(d1) | ~np.isfinite(d2)
                fail[bad & (fail < 0)] = s
                gx = grd[x]
                v = d0
                g = d1[:, None] * gx
                h = d1[:, None] * hes[x] + d2[:, None] * gx[:, iu] * gx[:, ju]
            bad = ~np.isfinite(v)
            fail[bad & (fail < 0)] = s
            val[s], grd[s], hes[s] = v, g, h

    O = len(outputs)
    value = np.empty((npts, O))
    grad = np.empty((npts, O, m))
    hess = np.empty((npts, O, m, m))
    for k, s in enumerate(outputs):
        value[:, k] = val[s]
        grad[:, k, :] = grd[s]
        hess[:, k, iu, ju] = hes[s]
        hess[:, k, ju, iu] = hes[s]
    dead = fail >= 0
    value[dead] = np.nan
    grad[dead] = np.nan
    hess[dead] = np.nan
    return value, grad, hess, fail
