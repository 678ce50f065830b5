# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled second-order jet evaluation over an instruction tape.

Same contract as ``_jet_py.eval_tape``; loops points outermost so each
point's working set stays in cache.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport (sin, cos, tan, atan, tanh, sinh, cosh, exp, log, sqrt,
                        fabs, pow, isfinite, NAN)

cnp.import_array()

# opcodes, kept in sync with tape.py (checked by the test suite)
cdef enum:
    CONST = 0
    VAR = 1
    ADD = 2
    SUB = 3
    MUL = 4
    DIV = 5
    NEG = 6
    POWI = 7
    POWR = 8
    SIN = 9
    COS = 10
    TAN = 11
    ATAN = 12
    TANH = 13
    SINH = 14
    COSH = 15
    EXP = 16
    LOG = 17
    SQRT = 18
    ABS = 19

OPCODES = {"CONST": CONST, "VAR": VAR, "ADD": ADD, "SUB": SUB, "MUL": MUL, "DIV": DIV,
           "NEG": NEG, "POWI": POWI, "POWR": POWR, "sin": SIN, "cos": COS, "tan": TAN,
           "atan": ATAN, "tanh": TANH, "sinh": SINH, "cosh": COSH, "exp": EXP,
           "log": LOG, "sqrt": SQRT, "abs": ABS}

cdef double POLE_TOL = 1e-15


cdef inline double ipow(double x, long n) nogil:
    """x^n for n >= 0 by repeated squaring."""
    cdef double r = 1.0
    while n:
        if n & 1:
            r *= x
        x *= x
        n >>= 1
    return r


cdef inline int unary(int o, double x, double c, double* d) nogil:
    """Fill d[0..2] with value, first and second derivative; return 1 on a domain failure."""
    cdef double s, co, t, r, k
    if o == SIN:
        s = sin(x); co = cos(x)
        d[0] = s; d[1] = co; d[2] = -s
    elif o == COS:
        s = sin(x); co = cos(x)
        d[0] = co; d[1] = -s; d[2] = -co
    elif o == TAN:
        if fabs(cos(x)) < POLE_TOL:
            return 1
        t = tan(x)
        s = 1.0 + t * t
        d[0] = t; d[1] = s; d[2] = 2.0 * t * s
    elif o == ATAN:
        r = 1.0 / (1.0 + x * x)
        d[0] = atan(x); d[1] = r; d[2] = -2.0 * x * r * r
    elif o == TANH:
        t = tanh(x)
        s = 1.0 - t * t
        d[0] = t; d[1] = s; d[2] = -2.0 * t * s
    elif o == SINH:
        s = sinh(x); co = cosh(x)
        d[0] = s; d[1] = co; d[2] = s
    elif o == COSH:
        s = sinh(x); co = cosh(x)
        d[0] = co; d[1] = s; d[2] = co
    elif o == EXP:
        t = exp(x)
        d[0] = t; d[1] = t; d[2] = t
    elif o == LOG:
        if not (x > 0):
            return 1
        r = 1.0 / x
        d[0] = log(x); d[1] = r; d[2] = -r * r
    elif o == SQRT:
        if not (x > 0):
            return 1
        r = sqrt(x)
        d[0] = r; d[1] = 0.5 / r; d[2] = -0.25 / (r * x)
    elif o == ABS:
        if x == 0:
            return 1
        d[0] = fabs(x)
        d[1] = 1.0 if x > 0 else -1.0
        d[2] = 0.0
    elif o == POWI:
        k = c
        if k == 0:
            d[0] = 1.0; d[1] = 0.0; d[2] = 0.0
        elif k == 1:
            d[0] = x; d[1] = 1.0; d[2] = 0.0
        elif k == 2:
            d[0] = x * x; d[1] = 2.0 * x; d[2] = 2.0
        else:
            if k < 0 and x == 0:
                return 1
            # x^(k-2) once, then two multiplications
            if k > 2:
                r = ipow(x, <long>k - 2)
            else:
                r = 1.0 / ipow(x, 2 - <long>k)
            d[0] = r * x * x; d[1] = k * r * x; d[2] = k * (k - 1) * r
    elif o == POWR:
        if x < 0 or (x == 0 and c < 2):
            return 1
        d[0] = pow(x, c); d[1] = c * pow(x, c - 1); d[2] = c * (c - 1) * pow(x, c - 2)
    else:
        return 1
    if not (isfinite(d[1]) and isfinite(d[2])):
        return 1
    return 0


def eval_tape(const int[::1] op, const int[::1] a, const int[::1] b, const double[::1] c,
              const int[::1] outputs, int nvars, points):
    cdef const double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t npts = pts.shape[0]
    cdef int m = nvars
    cdef int K = m * (m + 1) // 2
    cdef Py_ssize_t L = op.shape[0]
    cdef Py_ssize_t O = outputs.shape[0]

    cdef cnp.ndarray[cnp.int32_t, ndim=1] iu_arr = np.empty(K, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ju_arr = np.empty(K, dtype=np.int32)
    cdef int i, j, k, kk
    kk = 0
    for i in range(m):
        for j in range(i, m):
            iu_arr[kk] = i
            ju_arr[kk] = j
            kk += 1
    cdef int[::1] iu = iu_arr
    cdef int[::1] ju = ju_arr

    cdef double[::1] val = np.empty(L)
    cdef double[:, ::1] grd = np.empty((L, max(m, 1)))
    cdef double[:, ::1] hes = np.empty((L, max(K, 1)))

    value_arr = np.empty((npts, O))
    grad_arr = np.empty((npts, O, m))
    hess_arr = np.empty((npts, O, m, m))
    fail_arr = np.full(npts, -1, dtype=np.int32)
    cdef double[:, ::1] value = value_arr
    cdef double[:, :, ::1] grad = grad_arr
    cdef double[:, :, :, ::1] hess = hess_arr
    cdef int[::1] fail = fail_arr

    cdef Py_ssize_t p, s, x, y, q
    cdef int o, bad
    cdef double vx, vy, v, d[3]

    with nogil:
        # leaf slots have point-independent derivatives; nothing else writes them
        for s in range(L):
            o = op[s]
            if o == CONST or o == VAR:
                val[s] = c[s]
                for i in range(m):
                    grd[s, i] = 0.0
                for k in range(K):
                    hes[s, k] = 0.0
                if o == VAR:
                    grd[s, a[s]] = 1.0
        for p in range(npts):
            bad = 0
            for s in range(L):
                o = op[s]
                if o == CONST:
                    pass
                elif o == VAR:
                    val[s] = pts[p, a[s]]
                elif o == ADD:
                    x = a[s]; y = b[s]
                    val[s] = val[x] + val[y]
                    for i in range(m):
                        grd[s, i] = grd[x, i] + grd[y, i]
                    for k in range(K):
                        hes[s, k] = hes[x, k] + hes[y, k]
                elif o == SUB:
                    x = a[s]; y = b[s]
                    val[s] = val[x] - val[y]
                    for i in range(m):
                        grd[s, i] = grd[x, i] - grd[y, i]
                    for k in range(K):
                        hes[s, k] = hes[x, k] - hes[y, k]
                elif o == NEG:
                    x = a[s]
                    val[s] = -val[x]
                    for i in range(m):
                        grd[s, i] = -grd[x, i]
                    for k in range(K):
                        hes[s, k] = -hes[x, k]
                elif o == MUL:
                    x = a[s]; y = b[s]
                    vx = val[x]; vy = val[y]
                    val[s] = vx * vy
                    for i in range(m):
                        grd[s, i] = vx * grd[y, i] + vy * grd[x, i]
                    for k in range(K):
                        i = iu[k]; j = ju[k]
                        hes[s, k] = (vx * hes[y, k] + vy * hes[x, k]
                                     + grd[x, i] * grd[y, j] + grd[y, i] * grd[x, j])
                elif o == DIV:
                    x = a[s]; y = b[s]
                    vy = val[y]
                    if vy == 0:
                        bad = 1
                        break
                    v = val[x] / vy
                    val[s] = v
                    for i in range(m):
                        grd[s, i] = (grd[x, i] - v * grd[y, i]) / vy
                    for k in range(K):
                        i = iu[k]; j = ju[k]
                        hes[s, k] = (hes[x, k] - v * hes[y, k] - grd[s, i] * grd[y, j]
                                     - grd[y, i] * grd[s, j]) / vy
                else:
                    x = a[s]
                    if unary(o, val[x], c[s], d):
                        bad = 1
                        break
                    val[s] = d[0]
                    for k in range(K):
                        i = iu[k]; j = ju[k]
                        hes[s, k] = d[1] * hes[x, k] + d[2] * grd[x, i] * grd[x, j]
                    for i in range(m):
                        grd[s, i] = d[1] * grd[x, i]
                if not isfinite(val[s]):
                    bad = 1
                    break
            if bad:
                fail[p] = <int>s
                for q in range(O):
                    value[p, q] = NAN
                    for i in range(m):
                        grad[p, q, i] = NAN
                        for j in range(m):
                            hess[p, q, i, j] = NAN
                continue
            for q in range(O):
                s = outputs[q]
                value[p, q] = val[s]
                for i in range(m):
                    grad[p, q, i] = grd[s, i]
                for k in range(K):
                    i = iu[k]; j = ju[k]
                    hess[p, q, i, j] = hes[s, k]
                    hess[p, q, j, i] = hes[s, k]
    return value_arr, grad_arr, hess_arr, fail_arr
