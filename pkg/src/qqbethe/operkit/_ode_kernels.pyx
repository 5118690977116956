# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince kernels for the two linear second-order problems.

Radial:  psi'' = (L / x^2 + x^(2 alpha) - E) psi, integrated in x.
Circle:  psi'' = (v(z) + lam z^k) psi on z = c + rho e^(i theta), integrated in theta.
"""

from libc.math cimport fabs, sqrt, pow, log, sin, cos, fmax, fmin
import numpy as np

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex clog(double complex)
    double cabs(double complex)

# Dormand-Prince 5(4) tableau
cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40

cdef struct Model:
    int kind
    double L
    double two_alpha
    double complex E
    double complex center
    double complex logc
    double rho
    double kexp
    double rr1
    double complex s1
    double complex lam
    int m
    double complex* w
    double complex* a


cdef inline double complex potential_circle(Model* M, double complex z, double th) noexcept nogil:
    cdef double complex v = M.rr1 / (z * z) + M.s1 / z
    cdef int j
    cdef double complex dz
    for j in range(M.m):
        dz = z - M.w[j]
        v += 2.0 / (dz * dz) + M.a[j] / dz
    cdef double complex u = M.rho * (cos(th) + 1j * sin(th)) / M.center
    # log1p for the principal branch near the center
    v += M.lam * cexp(M.kexp * (M.logc + clog(1.0 + u)))
    return v


cdef inline void rhs(Model* M, double t, double complex* y, double complex* dy, int n) noexcept nogil:
    cdef double complex V, dz, z
    cdef int c
    if M.kind == 0:
        V = M.L / (t * t) + pow(t, M.two_alpha) - M.E
        for c in range(0, n, 2):
            dy[c] = y[c + 1]
            dy[c + 1] = V * y[c]
    else:
        dz = M.rho * (cos(t) + 1j * sin(t))
        z = M.center + dz
        V = potential_circle(M, z, t)
        dz = 1j * dz
        for c in range(0, n, 2):
            dy[c] = dz * y[c + 1]
            dy[c + 1] = dz * V * y[c]


cdef int dopri(Model* M, double t0, double t1, double complex* y, int n,
               double rtol, double atol, double h0, double* logscale, int rescale,
               int max_steps) noexcept nogil:
    cdef double complex k1[4]
    cdef double complex k2[4]
    cdef double complex k3[4]
    cdef double complex k4[4]
    cdef double complex k5[4]
    cdef double complex k6[4]
    cdef double complex k7[4]
    cdef double complex yt[4]
    cdef double complex yn[4]
    cdef double t = t0, h, err, sc, e, fac, big
    cdef double direction = 1.0 if t1 > t0 else -1.0
    cdef int i, steps = 0
    h = fabs(h0) * direction
    rhs(M, t, y, k1, n)
    while direction * (t1 - t) > 0:
        if steps >= max_steps:
            return -1
        if direction * (t + h - t1) > 0:
            h = t1 - t
        for i in range(n):
            yt[i] = y[i] + h * A21 * k1[i]
        rhs(M, t + C2 * h, yt, k2, n)
        for i in range(n):
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        rhs(M, t + C3 * h, yt, k3, n)
        for i in range(n):
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        rhs(M, t + C4 * h, yt, k4, n)
        for i in range(n):
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        rhs(M, t + C5 * h, yt, k5, n)
        for i in range(n):
            yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        rhs(M, t + h, yt, k6, n)
        for i in range(n):
            yn[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
        rhs(M, t + h, yn, k7, n)
        err = 0.0
        for i in range(n):
            sc = atol + rtol * fmax(cabs(y[i]), cabs(yn[i]))
            e = cabs(h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])) / sc
            err = fmax(err, e)
        if err <= 1.0:
            t = t + h
            for i in range(n):
                y[i] = yn[i]
                k1[i] = k7[i]
            steps += 1
            if rescale:
                big = 0.0
                for i in range(n):
                    big = fmax(big, cabs(y[i]))
                if big > 1e50 or (big < 1e-50 and big > 0):
                    for i in range(n):
                        y[i] = y[i] / big
                        k1[i] = k1[i] / big
                    logscale[0] += log(big)
        if err == 0.0:
            fac = 5.0
        else:
            fac = fmin(5.0, fmax(0.2, 0.9 * pow(err, -0.2)))
        h = h * fac
    return steps


def integrate_radial(double complex E, double L, double alpha, double x0, double x1,
                     double complex psi0, double complex dpsi0,
                     double rtol=1e-11, double atol=1e-300, double h0=1e-3,
                     int max_steps=2000000):
    cdef Model M
    M.kind = 0
    M.L = L
    M.two_alpha = 2.0 * alpha
    M.E = E
    M.m = 0
    cdef double complex y[4]
    y[0] = psi0
    y[1] = dpsi0
    cdef double logscale = 0.0
    cdef int steps
    with nogil:
        steps = dopri(&M, x0, x1, y, 2, rtol, atol, h0, &logscale, 1, max_steps)
    if steps < 0:
        raise RuntimeError("radial integration exceeded the step budget")
    return y[0], y[1], logscale, steps


def integrate_circle(double complex center, double rho, double kexp, double rr1,
                     double complex s1, double complex lam, w, a,
                     double rtol=1e-12, double atol=1e-14, double h0=1e-3,
                     int max_steps=2000000):
    """Fundamental matrix after one turn, in the (psi, dpsi/dz) basis."""
    cdef Model M
    wa = np.ascontiguousarray(w, dtype=np.complex128)
    aa = np.ascontiguousarray(a, dtype=np.complex128)
    cdef double complex[::1] wv = wa
    cdef double complex[::1] av = aa
    M.kind = 1
    M.center = center
    M.logc = clog(center)
    M.rho = rho
    M.kexp = kexp
    M.rr1 = rr1
    M.s1 = s1
    M.lam = lam
    M.m = wa.shape[0]
    M.w = &wv[0] if M.m > 0 else NULL
    M.a = &av[0] if M.m > 0 else NULL
    cdef double complex y[4]
    y[0] = 1.0
    y[1] = 0.0
    y[2] = 0.0
    y[3] = 1.0
    cdef double logscale = 0.0
    cdef int steps
    cdef double twopi = 6.283185307179586
    with nogil:
        steps = dopri(&M, 0.0, twopi, y, 4, rtol, atol, h0, &logscale, 0, max_steps)
    if steps < 0:
        raise RuntimeError("circle integration exceeded the step budget")
    out = np.empty((2, 2), dtype=np.complex128)
    out[0, 0] = y[0]
    out[1, 0] = y[1]
    out[0, 1] = y[2]
    out[1, 1] = y[3]
    return out, steps
