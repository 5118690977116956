"""Bethe equations: construction, damped Newton, and functional residuals.

Q-functions are monic polynomials given by their roots.  The Bethe equations
are homogeneous in the spectral parameter, so every solution comes with the
one-parameter family w -> c*w; taking the product of all equations also gives
the sum rule prod_i v_i^(2 N_i) = q^(N^T B N), which must hold for any
solution to exist.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .liedata import AlgebraData, TwistedFoldData


class SingularConfiguration(ValueError):
    """Two roots sit on each other's q-shifted lattice points."""


@dataclass
class BetheSystem:
    algebra: AlgebraData
    beta2: float
    v: Sequence[complex]
    degrees: Sequence[int]
    branch_integers: Sequence[int] | None = None  # None: principal branch

    def __post_init__(self):
        self.v = [complex(x) for x in self.v]
        self.degrees = [int(n) for n in self.degrees]
        n = self.algebra.rank
        if len(self.v) != n or len(self.degrees) != n:
            raise ValueError(f"need {n} values of v and of degrees")
        if any(x == 0 for x in self.v):
            raise ValueError("v_i must be nonzero")
        if any(d < 0 for d in self.degrees):
            raise ValueError("degrees must be >= 0")
        if self.branch_integers is not None:
            self.branch_integers = [int(b) for b in self.branch_integers]
            if len(self.branch_integers) != self.n_roots:
                raise ValueError("one branch integer per root is required")

    @property
    def q(self) -> complex:
        return cmath.exp(1j * math.pi * self.beta2)

    @property
    def n_roots(self) -> int:
        return sum(self.degrees)

    def node_of(self) -> list[int]:
        """Node (1-based) of each flat root slot."""
        out = []
        for i, n in enumerate(self.degrees, start=1):
            out += [i] * n
        return out

    def split(self, flat) -> list[list[complex]]:
        out, pos = [], 0
        for n in self.degrees:
            out.append(list(flat[pos:pos + n]))
            pos += n
        return out

    def sum_rule_defect(self) -> float:
        """|prod v_i^(2N_i) q^(-N^T B N) - 1|, zero when solutions can exist."""
        N = np.array(self.degrees)
        B = np.array(self.algebra.bmatrix)
        lhs = sum(2 * n * cmath.log(v) for n, v in zip(self.degrees, self.v))
        rhs = 1j * math.pi * self.beta2 * float(N @ B @ N)
        return abs(cmath.exp(lhs - rhs) - 1)


@dataclass
class BetheSolution:
    roots: list[list[complex]]
    residuals: list[complex]
    converged: bool
    iterations: int
    status: str
    nullity: int = 0
    cond: float = float("nan")
    sum_rule_defect: float = 0.0
    trajectory: list[list[complex]] = field(default_factory=list)

    @property
    def residual_max(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)


def _check_collisions(system: BetheSystem, w: np.ndarray, tol: float) -> None:
    nodes = system.node_of()
    q = system.q
    for a, (wa, i) in enumerate(zip(w, nodes)):
        if wa == 0:
            raise SingularConfiguration(f"root {a} is zero")
        for b, (wb, j) in enumerate(zip(w, nodes)):
            if a == b:
                continue
            Bij = system.algebra.B(i, j)
            if Bij == 0:
                continue
            for s in (Bij, -Bij):
                if abs(wa * q**s - wb) <= tol * abs(wb):
                    raise SingularConfiguration(
                        f"root {a} (node {i}) times q^{s} hits root {b} (node {j})"
                    )


def build_bae(system: BetheSystem, collision_tol: float = 1e-8) -> Callable:
    """Return F(w) -> log-form residual vector, one entry per root."""
    nodes = system.node_of()
    alg = system.algebra
    q = system.q
    Bm = np.array([[alg.B(i, j) for j in nodes] for i in nodes], dtype=float)
    qp = q ** Bm
    qm = q ** (-Bm)
    logv = np.array([-2 * cmath.log(system.v[i - 1]) for i in nodes])
    branch = system.branch_integers

    def F(w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        if w.size == 0:
            return np.zeros(0, dtype=complex)
        _check_collisions(system, w, collision_tol)
        num = np.log(w[:, None] * qp - w[None, :])
        den = np.log(w[:, None] * qm - w[None, :])
        # self terms: w(q^B - 1)/w(q^-B - 1), written without the cancelling w
        diag = np.diag_indices(w.size)
        num[diag] = np.log(np.diag(qp) - 1)
        den[diag] = np.log(np.diag(qm) - 1)
        mask = Bm != 0
        r = logv + np.where(mask, num - den, 0).sum(axis=1)
        if branch is None:
            r = r - 1j * math.pi
            return r.real + 1j * (np.angle(np.exp(1j * r.imag)))
        return r - 1j * math.pi * (2 * np.array(branch) + 1)

    return F


def exp_residual(system: BetheSystem, w) -> np.ndarray:
    """v_i^-2 prod_j Q_j(w q^B_ij)/Q_j(w q^-B_ij) + 1 for each root."""
    w = np.asarray(w, dtype=complex)
    nodes = system.node_of()
    q = system.q
    out = []
    for a, i in enumerate(nodes):
        val = system.v[i - 1] ** -2
        for b, j in enumerate(nodes):
            Bij = system.algebra.B(i, j)
            if Bij:
                val *= (w[a] * q**Bij - w[b]) / (w[a] * q**-Bij - w[b]) if a != b else (
                    (q**Bij - 1) / (q**-Bij - 1)
                )
        out.append(val + 1)
    return np.array(out)


def _jacobian(system: BetheSystem, w: np.ndarray) -> np.ndarray:
    """d F_a / d log w_b."""
    nodes = system.node_of()
    q = system.q
    n = w.size
    J = np.zeros((n, n), dtype=complex)
    for a, i in enumerate(nodes):
        for b, j in enumerate(nodes):
            if a == b:
                continue
            Bij = system.algebra.B(i, j)
            if not Bij:
                continue
            up = w[a] * q**Bij
            dn = w[a] * q**-Bij
            J[a, a] += up / (up - w[b]) - dn / (dn - w[b])
            J[a, b] += -w[b] / (up - w[b]) + w[b] / (dn - w[b])
    return J


def solve_newton(
    system: BetheSystem,
    init: Sequence[complex],
    tol: float = 1e-12,
    max_iter: int = 200,
    collision_tol: float = 1e-8,
    record: bool = False,
) -> BetheSolution:
    """Damped Newton on log w; raises SingularConfiguration on a colliding start."""
    w = np.asarray(init, dtype=complex)
    if w.size != system.n_roots:
        raise ValueError(f"expected {system.n_roots} initial roots, got {w.size}")
    F = build_bae(system, collision_tol)
    defect = system.sum_rule_defect()
    if w.size == 0:
        return BetheSolution([[] for _ in system.degrees], [], True, 0, "converged", 0, 1.0, defect)
    if np.any(w == 0):
        raise SingularConfiguration("initial root at 0")
    x = np.log(w)
    r = F(w)
    traj = [list(w)] if record else []
    it = 0
    status = "max-iterations"
    J = _jacobian(system, w)
    while it < max_iter:
        if np.max(np.abs(r)) < tol:
            status = "converged"
            break
        it += 1
        J = _jacobian(system, np.exp(x))
        step = np.linalg.lstsq(J, -r, rcond=1e-12)[0]
        norm0 = np.linalg.norm(r)
        lam = 1.0
        for _ in range(40):
            xn = x + lam * step
            try:
                rn = F(np.exp(xn))
            except SingularConfiguration:
                rn = None
            if rn is not None and np.linalg.norm(rn) < norm0:
                break
            lam *= 0.5
        else:
            status = "stalled"
            break
        x, r = xn, rn
        if record:
            traj.append(list(np.exp(x)))
    w = np.exp(x)
    J = _jacobian(system, w)
    sv = np.linalg.svd(J, compute_uv=False) if w.size else np.zeros(0)
    scale = max(sv.max() if sv.size else 0.0, 1.0)
    nullity = int(np.sum(sv <= 1e-8 * scale))
    cond = float(sv.max() / sv.min()) if sv.size and sv.min() > 0 else float("inf")
    converged = bool(np.max(np.abs(r)) < tol)
    if converged:
        status = "underdetermined" if nullity > 0 else "converged"
    elif defect > 1e-8:
        status = "inconsistent"
    return BetheSolution(
        system.split(list(w)), list(r), converged, it, status, nullity, cond, defect, traj
    )


# -- functional relations ----------------------------------------------------


def poly_from_roots(roots: Sequence[complex]) -> Callable[[complex], complex]:
    roots = [complex(r) for r in roots]

    def Q(u):
        out = 1.0 + 0j
        for r in roots:
            out *= u - r
        return out

    return Q


def qsyst_rhs(alg: AlgebraData, i: int, q: complex, Qs: Sequence[Callable], u: complex) -> complex:
    out = 1.0 + 0j
    for j in alg.neighbors(i):
        c = alg.C(i, j)
        shifts = {-1: [0], -2: [-1, 1], -3: [-2, 0, 2]}[c]
        for s in shifts:
            out *= Qs[j - 1](u * q**s)
    return out


def qsyst_residual(
    system: BetheSystem,
    Qs: Sequence[Callable],
    Qts: Sequence[Callable],
    grid: Sequence[complex],
) -> float:
    alg = system.algebra
    q = system.q
    worst = 0.0
    for i in alg.nodes():
        qi = q ** alg.d(i)
        v = system.v[i - 1]
        for u in grid:
            try:
                lhs = v * Qs[i - 1](u / qi) * Qts[i - 1](u * qi) - Qs[i - 1](u * qi) * Qts[i - 1](u / qi) / v
                val = abs(lhs - qsyst_rhs(alg, i, q, Qs, u))
            except (ZeroDivisionError, OverflowError, FloatingPointError) as exc:
                raise ValueError(f"evaluation failed at node {i}, u={u}: {exc}") from exc
            if not math.isfinite(val):
                raise ValueError(f"non-finite residual at node {i}, u={u}")
            worst = max(worst, val)
    return worst


def sl2_lattice_qtilde(
    roots: Sequence[complex], v: complex, q: complex, x0: complex, steps: int, seed: complex = 0.0
) -> np.ndarray:
    """Q~ on x_m = x0 q^(2m) from Q~(x_{m+1}) = [1 + Q(x_{m+1}) Q~(x_m)/v] / (v Q(x_m))."""
    Q = poly_from_roots(roots)
    vals = np.empty(steps + 1, dtype=complex)
    vals[0] = seed
    x = x0
    for m in range(steps):
        xn = x * q * q
        vals[m + 1] = (1 + Q(xn) * vals[m] / v) / (v * Q(x))
        x = xn
    return vals


def lattice_blowup(
    roots: Sequence[complex], v: complex, q: complex, steps: int = 20, eps: float = 1e-8
) -> float:
    """Largest |Q~| when each lattice is started one step before a root of Q.

    At a root w the recurrence divides by Q(w(1+eps)) ~ eps, and the numerator
    equals the exponential-form Bethe residual at w up to O(eps), so the value
    stays bounded exactly when the roots solve the equations.
    """
    worst = 0.0
    for w in roots:
        x0 = w * (1 + eps) / (q * q)
        vals = sl2_lattice_qtilde(roots, v, q, x0, steps)
        worst = max(worst, float(np.max(np.abs(vals))))
    return worst


def twisted_rhs(fold: TwistedFoldData, i: int, a: complex, Qs: Sequence[Callable]) -> complex:
    """Right-hand side of the folded QQ-tilde relation at orbit i (0-based)."""
    if a == 0:
        raise ValueError("a = 0 has no well-defined r-th roots")
    r = fold.order
    di = fold.sym[i]
    out = 1.0 + 0j
    nbrs = fold.neighbors(i)
    if di == r:
        for j in nbrs:
            if fold.sym[j] == r:
                out *= Qs[j](a)
            else:
                root = a ** (1.0 / r)
                for m in range(r):
                    out *= Qs[j](root * cmath.exp(2j * math.pi * m / r))
    elif di == 1:
        for j in nbrs:
            out *= Qs[j](a**r) if fold.sym[j] == r else Qs[j](a)
    else:
        out *= Qs[i](-a)
        for j in nbrs:
            out *= Qs[j](a)
    return out


# -- gl1 toroidal ------------------------------------------------------------


def gl1_bae_residual(roots, q1: complex, q2: complex, q3: complex, t: complex, tol: float = 1e-10):
    if abs(1 / (q1 * q3) - q2) > tol * max(1.0, abs(q2)):
        raise ValueError("need (q1 q3)^-1 = q2")
    Q = poly_from_roots(roots)
    out = []
    for w in roots:
        if w == 0:
            raise ValueError("root at 0")
        out.append(Q(w * q1) * Q(w * q2) * Q(w * q3) + t * Q(w / q1) * Q(w / q2) * Q(w / q3))
    return np.array(out, dtype=complex)


def gl1_single_root_t(w: complex, q1: complex, q2: complex, q3: complex) -> complex:
    """t solving the one-root equation, from the cubic ratio."""
    num = (q1 - 1) * (q2 - 1) * (q3 - 1)
    den = (1 / q1 - 1) * (1 / q2 - 1) * (1 / q3 - 1)
    return -num / den


def gl1_solve_degree2(q1, q2, q3, s0: complex, t0: complex, tol: float = 1e-13, max_iter: int = 100):
    """Newton for roots (1, s) and t of the degree-2 gl1 equations."""

    def G(z):
        s, t = z
        return gl1_bae_residual([1.0, s], q1, q2, q3, t)

    z = np.array([s0, t0], dtype=complex)
    for it in range(max_iter):
        g = G(z)
        if np.max(np.abs(g)) < tol:
            return z[0], z[1], it
        h = 1e-7
        J = np.empty((2, 2), dtype=complex)
        for k in range(2):
            dz = np.zeros(2, dtype=complex)
            dz[k] = h
            J[:, k] = (G(z + dz) - G(z - dz)) / (2 * h)
        z = z - np.linalg.solve(J, g)
    raise RuntimeError("gl1 degree-2 Newton did not converge")


def gl1_degree2_resultant(q1, q2, q3) -> np.ndarray:
    """Polynomial in s whose roots give admissible (1, s) root pairs."""
    P = np.polynomial.Polynomial

    def Qs(u):  # (u - 1)(u - s) as a polynomial in s, for numeric u
        return P([(u - 1) * u, -(u - 1)])

    def A(w):
        return Qs(w * q1) * Qs(w * q2) * Qs(w * q3)

    def Bf(w):
        return Qs(w / q1) * Qs(w / q2) * Qs(w / q3)

    # at w = s: Q(sc) = (sc - 1)(sc - s) = s (sc - 1)(c - 1)
    def A2():
        out = P([1.0])
        for c in (q1, q2, q3):
            out = out * P([0, 1]) * P([-1, c]) * (c - 1)
        return out

    def B2():
        out = P([1.0])
        for c in (1 / q1, 1 / q2, 1 / q3):
            out = out * P([0, 1]) * P([-1, c]) * (c - 1)
        return out

    res = A(1.0) * B2() - A2() * Bf(1.0)
    return res.coef


def gl1_resultant_roots(q1, q2, q3, rel: float = 1e-9, big: float = 1e8) -> list[complex]:
    """Admissible s from the resultant, without the roots forced by the gauge.

    s = 0 and s = 1 make the two roots degenerate and always solve the
    eliminated equation; near-zero leading coefficients give huge spurious roots.
    """
    c = np.array(gl1_degree2_resultant(q1, q2, q3), dtype=complex)
    scale = np.max(np.abs(c))
    while c.size > 1 and abs(c[-1]) <= rel * scale:
        c = c[:-1]
    roots = np.polynomial.Polynomial(c).roots()
    return [complex(s) for s in roots if abs(s) > 1e-6 and abs(s - 1) > 1e-6 and abs(s) < big]
