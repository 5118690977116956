"""sl2 opers for the KdV spectra: constants, the z-form potential, accessory
equations for the apparent singularities, and the change of variables to x."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from ..liedata import AlgebraData


def as_fraction(x) -> Fraction:
    """Exact rational from int, Fraction, decimal string or float (via its repr)."""
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class KdvConstants:
    r: Fraction
    k: Fraction
    alpha: Fraction
    beta2: Fraction
    ell: Fraction
    ell_ell1: Fraction
    central_charge: Fraction
    delta: Fraction
    e_per_lambda: float  # E = e_per_lambda * lambda

    def to_json(self) -> dict:
        return {
            "r": str(self.r), "k": str(self.k), "alpha": str(self.alpha),
            "beta2": str(self.beta2), "ell": str(self.ell), "ell_ell1": str(self.ell_ell1),
            "c": str(self.central_charge), "delta": str(self.delta),
            "e_per_lambda": self.e_per_lambda,
        }


def alpha_of_k(k) -> Fraction:
    k = as_fraction(k)
    if k == -2:
        raise ValueError("k = -2 is excluded")
    return -(k + 1) / (k + 2)


def k_of_alpha(alpha) -> Fraction:
    alpha = as_fraction(alpha)
    if alpha == -1:
        raise ValueError("alpha = -1 is excluded")
    return -(2 * alpha + 1) / (alpha + 1)


def central_charge(k) -> Fraction:
    k = as_fraction(k)
    if k == -2:
        raise ValueError("k = -2 is excluded")
    return 1 - Fraction(6) * (k + 1) ** 2 / (k + 2)


def delta_rk(r, k) -> Fraction:
    r, k = as_fraction(r), as_fraction(k)
    if k == -2:
        raise ValueError("k = -2 is excluded")
    return ((2 * r + 1) ** 2 - (k + 1) ** 2) / (4 * (k + 2))


def delta_ell_alpha(ell, alpha) -> Fraction:
    ell, alpha = as_fraction(ell), as_fraction(alpha)
    return ((2 * ell + 1) ** 2 - 4 * alpha**2) / (16 * (alpha + 1))


def ell_of(r, alpha) -> Fraction:
    # the root of l(l+1) = (alpha+1)^2 (2r+1)^2 - 1/4 continuous with l = r at alpha = 0
    return (as_fraction(alpha) + 1) * (2 * as_fraction(r) + 1) - Fraction(1, 2)


def r_of(ell, alpha) -> Fraction:
    return ((as_fraction(ell) + Fraction(1, 2)) / (as_fraction(alpha) + 1) - 1) / 2


def constants(r, k) -> KdvConstants:
    r, k = as_fraction(r), as_fraction(k)
    alpha = alpha_of_k(k)
    ell = ell_of(r, alpha)
    ll1 = ell * (ell + 1)
    delta = delta_rk(r, k)
    c = central_charge(k)
    # the same quantities through the alpha-parametrization; these must agree exactly
    assert ll1 == 4 * (alpha + 1) ** 2 * r * (r + 1) + alpha**2 + 2 * alpha + Fraction(3, 4)
    assert ll1 == 4 * (alpha + 1) * delta + alpha**2 - Fraction(1, 4)
    assert delta == delta_ell_alpha(ell, alpha)
    assert c == 1 - 6 * alpha**2 / (alpha + 1)
    a = float(alpha)
    return KdvConstants(
        r=r, k=k, alpha=alpha, beta2=1 / (alpha + 1), ell=ell, ell_ell1=ll1,
        central_charge=c, delta=delta,
        e_per_lambda=-((2 * a + 2) ** (2 * a / (a + 1))),
    )


@dataclass(frozen=True)
class GeneralConstants:
    algebra: str
    k: Fraction
    dual_coxeter: int
    alpha: Fraction
    power: Fraction  # z = x^power / power^h

    def z_of_x(self, x):
        p = float(self.power)
        return x**p / p**self.dual_coxeter

    def dz_dx(self, x):
        p = float(self.power)
        return x ** (p - 1) / p ** (self.dual_coxeter - 1)

    def to_json(self) -> dict:
        return {
            "algebra": self.algebra, "k": str(self.k), "dual_coxeter": self.dual_coxeter,
            "alpha": str(self.alpha), "power": str(self.power),
        }


def general_constants(algebra: AlgebraData, k) -> GeneralConstants:
    k = as_fraction(k)
    h = algebra.dual_coxeter
    if k == -h:
        raise ValueError(f"k = -{h} is excluded for {algebra.name}")
    alpha = -(k + h - 1) / (k + h)
    p = h * (alpha + 1)
    assert k * p + h * (p - 1) == 0
    return GeneralConstants(algebra.name, k, h, alpha, p)


# --- the z-form oper -------------------------------------------------------

@dataclass
class OperSpec:
    """Parameters of the sl2 oper.

    z-form: d_z^2 - v(z) - lam z^k with v built from r, k, the apparent
    singularities w_j and the 1/z coefficient s (s = 1 is the KdV normalization).
    x-form: d_x^2 - l(l+1)/x^2 - x^(2 alpha) + E, with m = 0 here.
    The twisted reduction only relabels the e_theta0 slot, which is the
    lam z^k term; nothing else changes, so no separate variant is carried.
    """

    k: Fraction
    r: Fraction
    w: tuple = ()
    s: complex = 1.0
    variant: str = "z-form"
    constants: KdvConstants = field(init=False)

    def __post_init__(self):
        self.k = as_fraction(self.k)
        self.r = as_fraction(self.r)
        self.w = tuple(complex(x) for x in self.w)
        self.constants = constants(self.r, self.k)
        _check_points(self.w)

    @classmethod
    def from_alpha_ell(cls, alpha, ell, w=()) -> "OperSpec":
        alpha = as_fraction(alpha)
        return cls(k=k_of_alpha(alpha), r=r_of(ell, alpha), w=w, variant="x-form")

    @property
    def m(self) -> int:
        return len(self.w)

    @property
    def alpha(self) -> Fraction:
        return self.constants.alpha

    @property
    def ell(self) -> Fraction:
        return self.constants.ell

    def z_points(self) -> list[complex]:
        """Images z_j = (2 alpha + 2)^2 w_j of the singular points in the x-form."""
        p = 2 * float(self.alpha) + 2
        return [p * p * w for w in self.w]

    def with_points(self, w: Sequence[complex]) -> "OperSpec":
        return OperSpec(k=self.k, r=self.r, w=tuple(w), s=self.s, variant=self.variant)


def _check_points(w: Sequence[complex], tol: float = 1e-12) -> None:
    for j, a in enumerate(w):
        if abs(a) <= tol:
            raise ValueError(f"singular point w_{j + 1} is at the origin")
        for i in range(j):
            if abs(a - w[i]) <= tol * max(1.0, abs(a)):
                raise ValueError(f"singular points w_{i + 1} and w_{j + 1} coincide")


class KdvPotential:
    """v(z) and its regular part at each w_j, all in closed form."""

    def __init__(self, spec: OperSpec):
        self.spec = spec
        k = float(spec.k)
        self.k = k
        self.rr1 = float(spec.r * (spec.r + 1))
        self.w = np.array(spec.w, dtype=complex)
        self.a = k / self.w if spec.m else np.zeros(0, dtype=complex)
        self.s1 = complex(spec.s) - complex(self.a.sum())

    def __call__(self, z):
        z = complex(z)
        v = self.rr1 / z**2 + self.s1 / z
        for wj, aj in zip(self.w, self.a):
            d = z - wj
            v += 2.0 / d**2 + aj / d
        return v

    def regular(self, j: int, z, order: int = 0):
        """Derivative of order 0 or 1 of v minus its polar part at w_j."""
        z = complex(z)
        if order == 0:
            v = self.rr1 / z**2 + self.s1 / z
        else:
            v = -2 * self.rr1 / z**3 - self.s1 / z**2
        for i, (wi, ai) in enumerate(zip(self.w, self.a)):
            if i == j:
                continue
            d = z - wi
            if order == 0:
                v += 2.0 / d**2 + ai / d
            else:
                v += -4.0 / d**3 - ai / d**2
        return v

    def local_coefficients(self) -> list[tuple[complex, complex]]:
        """(v_{j,0}, v_{j,1}) of v = 2/(z-w_j)^2 + (k/w_j)/(z-w_j) + v_{j,0} + v_{j,1}(z-w_j) + ..."""
        return [(self.regular(j, w, 0), self.regular(j, w, 1)) for j, w in enumerate(self.w)]


def build_kdv_potential(spec: OperSpec) -> KdvPotential:
    return KdvPotential(spec)


def accessory_residual(spec: OperSpec) -> np.ndarray:
    if spec.m == 0:
        raise ValueError("no singular points: m must be at least 1")
    pot = KdvPotential(spec)
    out = []
    for (v0, v1), aj in zip(pot.local_coefficients(), pot.a):
        out.append(0.25 * aj**3 - aj * v0 + v1)
    return np.array(out, dtype=complex)


@dataclass
class AccessoryResult:
    w: list[complex]
    residual: list[complex]
    converged: bool
    iterations: int
    status: str

    @property
    def residual_max(self) -> float:
        return max((abs(x) for x in self.residual), default=0.0)

    def to_json(self) -> dict:
        return {
            "w": [[z.real, z.imag] for z in self.w],
            "residual_max": self.residual_max,
            "iterations": self.iterations,
            "converged": self.converged,
            "status": self.status,
        }


def solve_accessory(spec: OperSpec, init: Sequence[complex], tol: float = 1e-12,
                    max_iter: int = 100, collapse_tol: float = 1e-8,
                    escape: float = 1e6) -> AccessoryResult:
    """Newton on the accessory equations in the unknowns w_j (m <= 3).

    The residual decays like |w|^-3 at large w, so Newton works on w_j^3 times
    it; convergence still requires the unscaled residual below tol.
    """
    w = np.array([complex(x) for x in init], dtype=complex)
    m = len(w)
    if m == 0:
        raise ValueError("no singular points: m must be at least 1")
    if m > 3:
        raise ValueError("solve_accessory supports m <= 3")
    scale0 = max(np.max(np.abs(w)), 1.0)

    def F(ws):
        return accessory_residual(spec.with_points(ws)) * ws**3

    def raw(ws):
        return accessory_residual(spec.with_points(ws))

    try:
        f = F(w)
    except ValueError as exc:
        return AccessoryResult(list(w), [], False, 0, f"bad-start: {exc}")
    it = 0
    status = "max-iterations"
    while it < max_iter:
        if np.max(np.abs(raw(w))) < tol and np.max(np.abs(f)) < tol * scale0**3:
            status = "converged"
            break
        it += 1
        J = np.empty((m, m), dtype=complex)
        for c in range(m):
            h = 1e-7 * max(abs(w[c]), 1e-3)
            wp, wm = w.copy(), w.copy()
            wp[c] += h
            wm[c] -= h
            J[:, c] = (F(wp) - F(wm)) / (2 * h)
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            status = f"singular-jacobian (cond={np.linalg.cond(J):.3g})"
            break
        lam = 1.0
        norm0 = np.max(np.abs(f))
        for _ in range(30):
            trial = w + lam * step
            try:
                ft = F(trial)
            except ValueError:
                ft = None
            if ft is not None and np.max(np.abs(ft)) < norm0:
                break
            lam *= 0.5
        else:
            status = "stalled"
            break
        w, f = trial, ft
        if np.min(np.abs(w)) < collapse_tol:
            status = "collapsed-to-origin"
            break
        if np.max(np.abs(w)) > escape * scale0:
            status = "escaped-to-infinity"
            break
    w_out = [complex(x) for x in w]
    try:
        res = [complex(x) for x in raw(w)]
    except ValueError:
        res = []
    return AccessoryResult(w_out, res, status == "converged", it, status)


def accessory_m1_closed_form(r, k, s=1) -> complex:
    """The single apparent singularity for m = 1.

    Substituting v_{1,0} = r(r+1)/w^2 + (s - k/w)/w and v_{1,1} = -2r(r+1)/w^3 - (s - k/w)/w^2
    makes the accessory equation linear in w after multiplying by w^3:
    k(k+2)^2/4 - (k+2) r(r+1) = (k+1) s w.
    """
    r, k = float(as_fraction(r)), float(as_fraction(k))
    if k == -1:
        raise ValueError("k = -1 leaves no solution")
    return (k + 2) * (k * (k + 2) / 4 - r * (r + 1)) / ((k + 1) * complex(s))


# --- projective change of coordinates -------------------------------------

def schwarzian_from_derivatives(d1, d2, d3):
    if d1 == 0:
        raise ValueError("phi'(x) = 0: the Schwarzian is undefined")
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def schwarzian_power(a, x):
    """{x^a, x} = (1 - a^2) / (2 x^2)."""
    return (1 - a * a) / (2 * x * x)


def schwarzian(phi: Callable, x, derivatives: Callable | None = None, dps: int = 30):
    """{phi, x}.  With `derivatives(x) -> (phi', phi'', phi''')` the closed form is used;
    otherwise phi is differentiated numerically at `dps` digits."""
    if derivatives is not None:
        return schwarzian_from_derivatives(*derivatives(x))
    with mpmath.workdps(dps):
        d1, d2, d3 = (mpmath.diff(phi, mpmath.mpf(x), n) for n in (1, 2, 3))
        val = schwarzian_from_derivatives(d1, d2, d3)
    return complex(val) if isinstance(val, mpmath.mpc) else float(val)


def transform_projective(v: Callable, phi: Callable, x, derivatives: Callable | None = None):
    """Coefficient of d_x^2 - u(x) obtained from d_z^2 - v(z) under z = phi(x)."""
    if derivatives is None:
        with mpmath.workdps(30):
            d1 = complex(mpmath.diff(phi, mpmath.mpf(x), 1))
    else:
        d1 = derivatives(x)[0]
    return v(phi(x)) * d1**2 - 0.5 * schwarzian(phi, x, derivatives)


@dataclass(frozen=True)
class PowerMap:
    """z = x^p / c; for the sl2 oper p = 2 alpha + 2 and c = p^2."""

    p: float
    c: float

    def __call__(self, x):
        return x**self.p / self.c

    def derivatives(self, x):
        p, c = self.p, self.c
        return (
            p * x ** (p - 1) / c,
            p * (p - 1) * x ** (p - 2) / c,
            p * (p - 1) * (p - 2) * x ** (p - 3) / c,
        )

    def inverse(self, z):
        return (self.c * z) ** (1.0 / self.p)


def power_map(alpha) -> PowerMap:
    p = 2 * float(as_fraction(alpha)) + 2
    return PowerMap(p, p * p)


def z_total_potential(spec: OperSpec, lam) -> Callable:
    """v(z) + lam z^k: the full coefficient of the z-form operator."""
    pot = KdvPotential(spec)
    k = float(spec.k)
    return lambda z: pot(z) + lam * cmath.exp(k * cmath.log(z))


def x_potential(spec: OperSpec, E, x):
    """l(l+1)/x^2 + x^(2 alpha) - 2 (d/dx)^2 sum_j log(x^p - z_j) - E, with p = 2 alpha + 2."""
    c = spec.constants
    a = float(c.alpha)
    p = 2 * a + 2
    u = float(c.ell_ell1) / x**2 + x ** (2 * a) - E
    for zj in spec.z_points():
        f = x**p - zj
        f1 = p * x ** (p - 1)
        f2 = p * (p - 1) * x ** (p - 2)
        u -= 2 * (f2 / f - (f1 / f) ** 2)
    return u


def x_potential_from_z(spec: OperSpec, E, x):
    """The same coefficient obtained by transforming the z-form operator."""
    lam = E / spec.constants.e_per_lambda
    phi = power_map(spec.alpha)
    return transform_projective(z_total_potential(spec, lam), phi, x, phi.derivatives)


def lambda_of_E(spec: OperSpec, E):
    return E / spec.constants.e_per_lambda


def is_resonant(ell) -> bool:
    twice = 2 * as_fraction(ell) + 1
    return twice.denominator == 1


def finite(x) -> bool:
    return math.isfinite(abs(x))
