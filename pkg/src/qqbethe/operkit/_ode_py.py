"""Pure-Python Dormand-Prince kernels, used when the compiled module is absent."""

from __future__ import annotations

import cmath
import math

import numpy as np

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


def _dopri(f, t0, t1, y, rtol, atol, h0, rescale, max_steps):
    n = len(y)
    rng = range(n)
    direction = 1.0 if t1 > t0 else -1.0
    t = t0
    h = abs(h0) * direction
    logscale = 0.0
    steps = 0
    k1 = f(t, y)
    while direction * (t1 - t) > 0:
        if steps >= max_steps:
            raise RuntimeError("integration exceeded the step budget")
        if direction * (t + h - t1) > 0:
            h = t1 - t
        k2 = f(t + C2 * h, [y[i] + h * A21 * k1[i] for i in rng])
        k3 = f(t + C3 * h, [y[i] + h * (A31 * k1[i] + A32 * k2[i]) for i in rng])
        k4 = f(t + C4 * h, [y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]) for i in rng])
        k5 = f(t + C5 * h, [
            y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]) for i in rng
        ])
        k6 = f(t + h, [
            y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
            for i in rng
        ])
        yn = [
            y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
            for i in rng
        ]
        k7 = f(t + h, yn)
        err = 0.0
        for i in rng:
            sc = atol + rtol * max(abs(y[i]), abs(yn[i]))
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            err = max(err, abs(e) / sc)
        if err <= 1.0:
            t += h
            y, k1 = yn, k7
            steps += 1
            if rescale:
                big = max(abs(c) for c in y)
                if big > 1e50 or 0 < big < 1e-50:
                    y = [c / big for c in y]
                    k1 = [c / big for c in k1]
                    logscale += math.log(big)
        fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err**-0.2))
        h *= fac
    return y, logscale, steps


def integrate_radial(E, L, alpha, x0, x1, psi0, dpsi0, rtol=1e-11, atol=1e-300, h0=1e-3,
                     max_steps=2000000):
    E = complex(E)
    two_alpha = 2.0 * alpha

    def f(x, y):
        V = L / (x * x) + x**two_alpha - E
        return [y[1], V * y[0]]

    y, logscale, steps = _dopri(f, x0, x1, [complex(psi0), complex(dpsi0)], rtol, atol, h0, True,
                                max_steps)
    return y[0], y[1], logscale, steps


def integrate_circle(center, rho, kexp, rr1, s1, lam, w, a, rtol=1e-12, atol=1e-14, h0=1e-3,
                     max_steps=2000000):
    center = complex(center)
    logc = cmath.log(center)
    w = [complex(x) for x in w]
    a = [complex(x) for x in a]

    def f(th, y):
        dz = rho * complex(math.cos(th), math.sin(th))
        z = center + dz
        V = rr1 / (z * z) + s1 / z
        for wj, aj in zip(w, a):
            d = z - wj
            V += 2.0 / (d * d) + aj / d
        V += lam * cmath.exp(kexp * (logc + cmath.log(1.0 + dz / center)))
        dz = 1j * dz
        return [dz * y[1], dz * V * y[0], dz * y[3], dz * V * y[2]]

    y, _, steps = _dopri(f, 0.0, 2 * math.pi, [1, 0, 0, 1], rtol, atol, h0, False, max_steps)
    out = np.array([[y[0], y[2]], [y[1], y[3]]], dtype=complex)
    return out, steps
