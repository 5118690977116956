"""Spectral determinant of d_x^2 - l(l+1)/x^2 - x^(2 alpha) + E.

psi is the solution decaying fastest as x -> +inf, normalized so that
psi ~ x^(-alpha/2) exp(-x^(alpha+1)/(alpha+1)) up to the finite-part terms
that the E-dependence of the WKB phase forces when alpha <= 1.  Near x = 0
psi = Q(E) phi_minus + (...) phi_plus with phi_plus ~ x^(l+1), phi_minus ~ x^(-l),
so Q(E) = W[psi, phi_plus] / (2l + 1).
"""

from __future__ import annotations

import cmath
import math
import threading
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, linalg, optimize, special

from . import _backend
from .kdv import as_fraction, is_resonant

NORMALIZATION = "wkb-subdominant/frobenius-plus"


class ResonanceWarning(UserWarning):
    pass


def default_x_max(E, alpha: float) -> float:
    # floor keeps the decay exponent x^(alpha+1) at 400 whatever alpha is
    floor = 20.0 ** (2.0 / (alpha + 1.0))
    return max(floor, (abs(E) + 10.0) ** (1.0 / (2 * alpha)) * 1.5)


def _frobenius_plus(x: float, E: complex, ell: float, alpha: float, order: int = 12):
    """phi_plus and its derivative at x from the double series in x^2 and x^(2 alpha + 2)."""
    s = ell + 1.0
    step = 2 * alpha + 2
    c = {(0, 0): 1.0 + 0j}
    val = 0j
    der = 0j
    for n in range(order + 1):
        for a in range(n + 1):
            b = n - a
            if n:
                e = s + 2 * a + step * b
                num = 0j
                if a:
                    num -= E * c[(a - 1, b)]
                if b:
                    num += c[(a, b - 1)]
                c[(a, b)] = num / ((e - ell - 1) * (e + ell))
            e = s + 2 * a + step * b
            val += c[(a, b)] * x**e
            der += c[(a, b)] * e * x ** (e - 1)
    return val, der


def _wkb_start(E: complex, L: float, alpha: float, X: float):
    """log psi(X) and psi'(X)/psi(X) from the WKB series through fourth order."""
    a = alpha

    def P(t):
        return L / t**2 + t ** (2 * a) - E

    def dP(t):
        return -2 * L / t**3 + 2 * a * t ** (2 * a - 1)

    def d2P(t):
        return 6 * L / t**4 + 2 * a * (2 * a - 1) * t ** (2 * a - 2)

    def d3P(t):
        return -24 * L / t**5 + 2 * a * (2 * a - 1) * (2 * a - 2) * t ** (2 * a - 3)

    def ys(t):
        p, p1, p2, p3 = P(t), dP(t), d2P(t), d3P(t)
        y0 = -cmath.sqrt(p)
        y1 = -p1 / (4 * p)
        # y2 = -(y1' + y1^2) / (2 y0), y3 = -(y2' + 2 y1 y2) / (2 y0)
        y1p = -(p2 * p - p1 * p1) / (4 * p * p)
        y2 = -(y1p + y1 * y1) / (2 * y0)
        y0p = -p1 / (2 * cmath.sqrt(p))
        y1pp = -(p3 * p * p - 3 * p * p1 * p2 + 2 * p1**3) / (4 * p**3)
        y2p = -((y1pp + 2 * y1 * y1p) * y0 - (y1p + y1 * y1) * y0p) / (2 * y0 * y0)
        y3 = -(y2p + 2 * y1 * y2) / (2 * y0)
        return y0, y1, y2, y3

    # pure-E terms of t^a sqrt(1 - E t^(-2a)) that are not integrable at infinity
    sing = []
    n = 0
    while a - 2 * a * n >= -1:
        sing.append((complex(special.binom(0.5, n)) * (-E) ** n, a - 2 * a * n))
        n += 1

    def tail_integrand(t):
        # sqrt(P) - t^a written without cancellation, minus the remaining singular terms
        u = (L / (t * t) - E) * t ** (-2 * a)
        val = t**a * u / (1 + cmath.sqrt(1 + u))
        for cf, ex in sing[1:]:
            val -= cf * t**ex
        return val

    def finite_part(X):
        tot = 0j
        for cf, ex in sing:
            tot += cf * (math.log(X) if ex == -1 else X ** (ex + 1) / (ex + 1))
        return tot

    def cquad(fun, lo):
        # t = lo / s maps [lo, inf) onto (0, 1]
        def g(s):
            return fun(lo / s) * lo / (s * s)

        with warnings.catch_warnings():
            # the tails are tiny; roundoff at the requested absolute level is harmless
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            re = integrate.quad(lambda s: g(s).real, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
            im = integrate.quad(lambda s: g(s).imag, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
        return complex(re, im)

    tail = cquad(tail_integrand, X)
    corr = cquad(lambda t: sum(ys(t)[2:]), X)
    logpsi = (
        -finite_part(X)
        + tail
        - 0.25 * cmath.log(P(X) / X ** (2 * a))
        - 0.5 * a * math.log(X)
        - corr
    )
    y = sum(ys(X))
    return logpsi, y


def q_of_e(E, alpha, ell, x_min: float = 1e-3, x_max: float | None = None,
           rtol: float = 1e-11, series_order: int = 12, backend=None) -> complex:
    alpha = float(alpha)
    ell = float(ell)
    E = complex(E)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if ell <= -0.5:
        raise ValueError("ell must exceed -1/2")
    kern = backend or _backend
    L = ell * (ell + 1)
    X = x_max if x_max is not None else default_x_max(E, alpha)
    logpsi, y = _wkb_start(E, L, alpha, X)
    psi, dpsi, logscale, _ = kern.integrate_radial(E, L, alpha, X, x_min, 1.0 + 0j, y, rtol=rtol)
    if not (math.isfinite(abs(psi)) and math.isfinite(abs(dpsi))):
        raise OverflowError(f"integration overflow at E={E}")
    fp, dfp = _frobenius_plus(x_min, E, ell, alpha, series_order)
    w = psi * dfp - dpsi * fp
    return w / (2 * ell + 1) * cmath.exp(logpsi + logscale)


@dataclass
class QFunction:
    """Q(E) for fixed (alpha, ell) with a cache safe for concurrent readers."""

    alpha: float
    ell: float
    x_min: float = 1e-3
    x_max: float | None = None
    rtol: float = 1e-11
    series_order: int = 12
    zeros: list[float] = field(default_factory=list)
    normalization: str = NORMALIZATION

    def __post_init__(self):
        self.alpha = float(self.alpha)
        self.ell = float(self.ell)
        self._cache: dict[complex, complex] = {}
        self._lock = threading.Lock()
        if is_resonant(as_fraction(self.ell)):
            warnings.warn(
                f"2l+1 = {2 * self.ell + 1} is an integer: the Frobenius basis may need log terms",
                ResonanceWarning, stacklevel=2,
            )

    def __call__(self, E) -> complex:
        E = complex(E)
        hit = self._cache.get(E)
        if hit is not None:
            return hit
        val = q_of_e(E, self.alpha, self.ell, self.x_min, self.x_max, self.rtol, self.series_order)
        with self._lock:
            self._cache.setdefault(E, val)
        return val

    def real(self, E: float) -> float:
        return self(E).real

    def refined(self, factor: float = 0.5) -> "QFunction":
        """Same function at a tightened numerical budget (smaller rtol and x_min, larger x_max)."""
        xm = self.x_max if self.x_max is not None else None
        return QFunction(
            self.alpha, self.ell, self.x_min * factor,
            None if xm is None else xm / factor, self.rtol * factor**2, self.series_order,
        )

    def cache_size(self) -> int:
        return len(self._cache)


def find_q_zeros(qf: QFunction, e_max: float, count: int | None = None,
                 e_min: float = 0.0, grid: int | None = None, xtol: float = 1e-13) -> list[float]:
    """Real zeros of Q on [e_min, e_max]: sign changes on a grid, refined by brentq."""
    n = grid or max(100, int(5 * (e_max - e_min)))
    Es = np.linspace(e_min, e_max, n + 1)
    vals = [qf.real(E) for E in Es]
    zeros: list[float] = []
    for a, b, fa, fb in zip(Es[:-1], Es[1:], vals[:-1], vals[1:]):
        if fa == 0:
            zeros.append(float(a))
        elif fa * fb < 0:
            zeros.append(optimize.brentq(qf.real, a, b, xtol=xtol))
        if count is not None and len(zeros) >= count:
            break
    qf.zeros = zeros
    return zeros


def dq_de(qf: QFunction, E: float, h: float = 1e-4) -> complex:
    return (qf(E + h) - qf(E - h)) / (2 * h)


# --- independent finite-difference oracle --------------------------------

def fd_eigenvalues(alpha: float, ell: float, count: int, x_max: float = 10.0,
                   n: int = 4000, richardson: bool = True) -> np.ndarray:
    """Lowest eigenvalues of -psi'' + (l(l+1)/x^2 + x^(2 alpha)) psi = E psi.

    With psi = x^(l+1) u the problem is -(x^(2l+2) u')' + x^(2l+2+2 alpha) u = E x^(2l+2) u,
    regular at 0; discretized by a cell-centred flux scheme with u = 0 at x_max.
    """

    def solve(N):
        h = x_max / N
        xc = (np.arange(N) + 0.5) * h
        xf = np.arange(N + 1) * h
        p = xf ** (2 * ell + 2)
        wgt = xc ** (2 * ell + 2)
        diag = (p[:-1] + p[1:]) / h**2 + xc ** (2 * ell + 2 + 2 * alpha)
        diag[-1] += p[-1] / h**2  # ghost cell mirrors u to -u across x_max
        off = -p[1:-1] / h**2
        s = 1.0 / np.sqrt(wgt)
        d = diag * s * s
        e = off * s[:-1] * s[1:]
        return linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1),
                                       eigvals_only=True)

    coarse = solve(n)
    if not richardson:
        return coarse
    fine = solve(2 * n)
    return (4 * fine - coarse) / 3


# --- Bethe-ratio diagnostics ----------------------------------------------

@dataclass
class RatioReport:
    beta2: float
    zeros: list[float]
    ratios: list[complex]
    spread: float  # max_k |R_k / R_1 - 1|
    constant: complex
    predicted_plus: complex
    predicted_minus: complex
    orientation: str
    refinement_change: float | None = None

    def to_json(self) -> dict:
        return {
            "beta2": self.beta2,
            "zeros": self.zeros,
            "ratios": [[r.real, r.imag] for r in self.ratios],
            "spread": self.spread,
            "constant": [self.constant.real, self.constant.imag],
            "orientation": self.orientation,
            "refinement_change": self.refinement_change,
        }


def bethe_ratios(qf: QFunction, zeros: Sequence[float], beta2: float) -> list[complex]:
    q2 = cmath.exp(2j * math.pi * beta2)
    out = []
    for E in zeros:
        try:
            out.append(qf(E / q2) / qf(E * q2))
        except (OverflowError, RuntimeError) as exc:
            raise RuntimeError(f"shifted evaluation failed for E_k = {E}: {exc}") from exc
    return out


def ratio_spread(ratios: Sequence[complex]) -> float:
    return max(abs(r / ratios[0] - 1) for r in ratios)


def bae_ratio_check(qf: QFunction, beta2: float | str = "auto", certify: bool = True) -> RatioReport:
    if beta2 == "auto":
        beta2 = 1.0 / (qf.alpha + 1.0)
    beta2 = float(beta2)
    q2 = cmath.exp(2j * math.pi * beta2)
    if abs(q2.imag) < 1e-12:
        raise ValueError(f"beta2 = {beta2}: q^2 is real, the ratio test is degenerate")
    if not qf.zeros:
        raise ValueError("compute the zeros first")
    ratios = bethe_ratios(qf, qf.zeros, beta2)
    spread = ratio_spread(ratios)
    const = ratios[0]
    phase = cmath.exp(1j * math.pi * beta2 * (2 * qf.ell + 1))
    plus, minus = -phase, -1 / phase
    orientation = "-q^(2l+1)" if abs(const - plus) <= abs(const - minus) else "-q^-(2l+1)"
    change = None
    if certify:
        fine = qf.refined()
        change = max(abs(a - b) / abs(a) for a, b in zip(ratios, bethe_ratios(fine, qf.zeros, beta2)))
    return RatioReport(beta2, list(qf.zeros), ratios, spread, const, plus, minus, orientation, change)


def harmonic_zeros(ell: float, count: int) -> list[float]:
    """Exact spectrum at alpha = 1: E_n = 4n + 2l + 3."""
    return [4 * n + 2 * ell + 3 for n in range(count)]


__all__ = [
    "QFunction", "q_of_e", "find_q_zeros", "fd_eigenvalues", "bae_ratio_check",
    "bethe_ratios", "ratio_spread", "harmonic_zeros", "RatioReport", "ResonanceWarning",
    "NORMALIZATION",
]
