# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stepper for the named orbit kernels (rcn, newton, geodesic).

Twin of perihelion.integrate.pure: identical pair coefficients, error
control, starting-step heuristic, and interpolant assembly, specialized to
the three fixed-dimension right sides so the hot loop runs in C.  Event
location stays in Python on the returned dense data.
"""

import numpy as np

from libc.math cimport fabs, isfinite, pow, sqrt

# kernel ids (keep in step with perihelion.integrate._KERNEL_IDS)
DEF KID_RCN = 0
DEF KID_NEWTON = 1
DEF KID_GEODESIC = 2
DEF MAXDIM = 8

cdef double C2 = 1.0 / 5.0
cdef double C3 = 3.0 / 10.0
cdef double C4 = 4.0 / 5.0
cdef double C5 = 8.0 / 9.0
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0
# continuous-extension columns (theta^1..theta^4), rows k1,k3..k7
cdef double[4] P1 = [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
                     -12715105075.0 / 11282082432.0]
cdef double[4] P3 = [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
                     87487479700.0 / 32700410799.0]
cdef double[4] P4 = [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
                     -10690763975.0 / 1880347072.0]
cdef double[4] P5 = [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
                     701980252875.0 / 199316789632.0]
cdef double[4] P6 = [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
                     -1453857185.0 / 822651844.0]
cdef double[4] P7 = [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
                     69997945.0 / 29380423.0]

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 5.0
cdef double ORDER_EXP = 0.2


cdef inline void rhs_c(int kernel, double* p, double t, double* y, double* f) noexcept nogil:
    cdef double mu, c2, r2, r, g, s, v0, xv, vv, a, b, da, db, uu, q, w
    cdef int i
    if kernel == KID_RCN:
        mu = p[0]
        c2 = p[1] * p[1]
        r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2]
        r = sqrt(r2)
        g = sqrt(1.0 + (y[3] * y[3] + y[4] * y[4] + y[5] * y[5]) / c2)
        s = -mu / (r2 * r)
        f[0] = y[3] / g
        f[1] = y[4] / g
        f[2] = y[5] / g
        f[3] = s * y[0]
        f[4] = s * y[1]
        f[5] = s * y[2]
    elif kernel == KID_NEWTON:
        mu = p[0]
        r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2]
        r = sqrt(r2)
        s = -mu / (r2 * r)
        f[0] = y[3]
        f[1] = y[4]
        f[2] = y[5]
        f[3] = s * y[0]
        f[4] = s * y[1]
        f[5] = s * y[2]
    else:
        # geodesic in the quadratic isotropic metric, state
        # (x0, x, dx0/ds, dx/ds); A = 1-2u+2u^2, B = 1+2u, u = mu/(r c^2)
        mu = p[0]
        c2 = p[1] * p[1]
        r2 = y[1] * y[1] + y[2] * y[2] + y[3] * y[3]
        r = sqrt(r2)
        uu = mu / (r * c2)
        a = 1.0 - 2.0 * uu + 2.0 * uu * uu
        b = 1.0 + 2.0 * uu
        da = 2.0 * uu * (1.0 - 2.0 * uu) / r
        db = -2.0 * uu / r
        v0 = y[4]
        xv = y[1] * y[5] + y[2] * y[6] + y[3] * y[7]
        vv = y[5] * y[5] + y[6] * y[6] + y[7] * y[7]
        f[0] = v0
        f[1] = y[5]
        f[2] = y[6]
        f[3] = y[7]
        f[4] = -(da / a) * (xv / r) * v0
        s = -da * v0 * v0 / (2.0 * b * r)
        q = -db / (2.0 * b * r)
        for i in range(3):
            w = s * y[1 + i] + q * (2.0 * xv * y[5 + i] - vv * y[1 + i])
            f[4 + 1 + i] = w


cdef inline int kernel_dim(int kernel) noexcept nogil:
    return 8 if kernel == KID_GEODESIC else 6


def rhs_eval(int kernel, double[::1] params, double t, double[::1] y):
    """Single right-side evaluation (kernel parity tests)."""
    cdef int dim = kernel_dim(kernel)
    out = np.empty(dim)
    cdef double[::1] f = out
    cdef double yy[MAXDIM]
    cdef int i
    for i in range(dim):
        yy[i] = y[i]
    rhs_c(kernel, &params[0], t, yy, &f[0])
    return out


def _raise(name, msg):
    from perihelion.integrate import pure
    raise getattr(pure, name)(msg)


def propagate(
    int kernel,
    double[::1] params,
    double[::1] y0,
    double t0,
    double t1,
    double rtol,
    double atol,
    double h0,
    double hmax,
    long max_steps,
):
    """Adaptive run over [t0, t1]; returns (ts, nodes, conts, nfev, naccept, nreject)."""
    cdef int dim = kernel_dim(kernel)
    cdef double span = t1 - t0
    cdef double p[8]
    cdef int i, j
    for i in range(params.shape[0]):
        p[i] = params[i]

    cdef double y[MAXDIM]
    cdef double ynew[MAXDIM]
    cdef double ywork[MAXDIM]
    cdef double k[7][MAXDIM]
    cdef double err, scale, errnorm, h, t, hmin, factor
    cdef double d0, d1, d2, hg0, hg1
    cdef long nfev = 0, naccept = 0, nreject = 0

    for i in range(dim):
        y[i] = y0[i]

    rhs_c(kernel, p, t0, y, k[0])
    nfev = 1
    for i in range(dim):
        if not isfinite(k[0][i]):
            _raise("NonFiniteDerivative", f"right side not finite at t0={t0}")

    # starting step: mirror pure._hinit
    if h0 > 0.0:
        h = h0
        if h > hmax:
            h = hmax
        if h > span:
            h = span
    else:
        d0 = 0.0
        d1 = 0.0
        for i in range(dim):
            scale = atol + rtol * fabs(y[i])
            d0 += (y[i] / scale) * (y[i] / scale)
            d1 += (k[0][i] / scale) * (k[0][i] / scale)
        d0 = sqrt(d0 / dim)
        d1 = sqrt(d1 / dim)
        if d0 < 1e-5 or d1 < 1e-5:
            hg0 = 1e-6 * span
        else:
            hg0 = 0.01 * d0 / d1
        if hg0 > span:
            hg0 = span
        for i in range(dim):
            ywork[i] = y[i] + hg0 * k[0][i]
        rhs_c(kernel, p, t0 + hg0, ywork, k[1])
        nfev += 1
        d2 = 0.0
        for i in range(dim):
            scale = atol + rtol * fabs(y[i])
            d2 += ((k[1][i] - k[0][i]) / scale) * ((k[1][i] - k[0][i]) / scale)
        d2 = sqrt(d2 / dim) / hg0
        if d1 > d2:
            d2 = d1
        if d2 <= 1e-15:
            hg1 = 1e-6 * span
            if hg0 * 1e-3 > hg1:
                hg1 = hg0 * 1e-3
        else:
            hg1 = pow(0.01 / d2, ORDER_EXP)
        h = 100.0 * hg0
        if hg1 < h:
            h = hg1
        if span < h:
            h = span
        # floor against near-zero initial states (mirror pure._hinit)
        d0 = span
        if fabs(t0) > d0:
            d0 = fabs(t0)
        if h < 1e-12 * d0:
            h = 1e-12 * d0
        if hmax < h:
            h = hmax

    cdef long cap = 1024
    ts_arr = np.empty(cap + 1)
    nodes_arr = np.empty((cap + 1, dim))
    conts_arr = np.empty((cap, 5, dim))
    cdef double[::1] ts = ts_arr
    cdef double[:, ::1] nodes = nodes_arr
    cdef double[:, :, ::1] conts = conts_arr

    t = t0
    ts[0] = t0
    for i in range(dim):
        nodes[0, i] = y[i]

    cdef bint bad, last
    while t < t1:
        if naccept + nreject >= max_steps:
            _raise("MaxStepsExceeded", f"max_steps={max_steps} exhausted at t={t}")
        last = t + h >= t1
        if last:
            h = t1 - t
        else:
            hmin = fabs(t)
            if span > hmin:
                hmin = span
            hmin *= 1e-14
            if h < hmin:
                _raise("StepSizeUnderflow", f"step {h} below {hmin} at t={t}")

        for i in range(dim):
            ywork[i] = y[i] + h * (A21 * k[0][i])
        rhs_c(kernel, p, t + C2 * h, ywork, k[1])
        for i in range(dim):
            ywork[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i])
        rhs_c(kernel, p, t + C3 * h, ywork, k[2])
        for i in range(dim):
            ywork[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i])
        rhs_c(kernel, p, t + C4 * h, ywork, k[3])
        for i in range(dim):
            ywork[i] = y[i] + h * (
                A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]
            )
        rhs_c(kernel, p, t + C5 * h, ywork, k[4])
        for i in range(dim):
            ywork[i] = y[i] + h * (
                A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]
            )
        rhs_c(kernel, p, t + h, ywork, k[5])
        for i in range(dim):
            ynew[i] = y[i] + h * (
                B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]
            )
        rhs_c(kernel, p, t + h, ynew, k[6])
        nfev += 6

        bad = 0
        for i in range(dim):
            if not (isfinite(ynew[i]) and isfinite(k[6][i])):
                bad = 1
        if bad:
            _raise("NonFiniteDerivative", f"state or right side not finite near t={t + h}")

        errnorm = 0.0
        for i in range(dim):
            err = h * (
                E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i]
                + E6 * k[5][i] + E7 * k[6][i]
            )
            scale = fabs(y[i])
            if fabs(ynew[i]) > scale:
                scale = fabs(ynew[i])
            scale = atol + rtol * scale
            errnorm += (err / scale) * (err / scale)
        errnorm = sqrt(errnorm / dim)

        if errnorm > 1.0:
            nreject += 1
            factor = SAFETY * pow(errnorm, -ORDER_EXP)
            if factor < MIN_FACTOR:
                factor = MIN_FACTOR
            h *= factor
            continue

        if naccept == cap:
            cap *= 2
            ts_arr = np.concatenate([ts_arr, np.empty(ts_arr.shape[0])])[: cap + 1]
            nodes_new = np.empty((cap + 1, dim))
            nodes_new[: naccept + 1] = nodes_arr[: naccept + 1]
            nodes_arr = nodes_new
            conts_new = np.empty((cap, 5, dim))
            conts_new[:naccept] = conts_arr[:naccept]
            conts_arr = conts_new
            ts = ts_arr
            nodes = nodes_arr
            conts = conts_arr

        for i in range(dim):
            conts[naccept, 0, i] = y[i]
            for j in range(4):
                conts[naccept, 1 + j, i] = h * (
                    P1[j] * k[0][i] + P3[j] * k[2][i] + P4[j] * k[3][i]
                    + P5[j] * k[4][i] + P6[j] * k[5][i] + P7[j] * k[6][i]
                )
        naccept += 1

        t = t1 if last else t + h
        for i in range(dim):
            y[i] = ynew[i]
            k[0][i] = k[6][i]
        ts[naccept] = t
        for i in range(dim):
            nodes[naccept, i] = y[i]

        if errnorm == 0.0:
            factor = MAX_FACTOR
        else:
            factor = SAFETY * pow(errnorm, -ORDER_EXP)
            if factor < MIN_FACTOR:
                factor = MIN_FACTOR
            if factor > MAX_FACTOR:
                factor = MAX_FACTOR
        h *= factor
        if h > hmax:
            h = hmax

    return (
        ts_arr[: naccept + 1].copy(),
        nodes_arr[: naccept + 1].copy(),
        conts_arr[:naccept].copy(),
        nfev,
        naccept,
        nreject,
    )
