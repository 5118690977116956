"""Exact Drinfeld-Sokolov layer for sl_r: canonical form, Miura map, c(nu).

Coefficients are Laurent polynomials in t with Fraction coefficients.  A
differential operator sum_k c_k(t) d^k is stored as a list ``[c_0, ..., c_r]``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

MAX_RANK = 5


class LaurentPoly:
    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, object] | None = None):
        self._c = {int(e): Fraction(c) for e, c in (coeffs or {}).items() if c != 0}

    @classmethod
    def const(cls, c) -> "LaurentPoly":
        return cls({0: c})

    @classmethod
    def mono(cls, e: int, c=1) -> "LaurentPoly":
        return cls({e: c})

    @classmethod
    def lift(cls, x) -> "LaurentPoly":
        return x if isinstance(x, LaurentPoly) else cls.const(x)

    def items(self):
        return sorted(self._c.items())

    def coeff(self, e: int) -> Fraction:
        return self._c.get(e, Fraction(0))

    def __add__(self, other) -> "LaurentPoly":
        other = LaurentPoly.lift(other)
        out = dict(self._c)
        for e, c in other._c.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({e: -c for e, c in self._c.items()})

    def __sub__(self, other) -> "LaurentPoly":
        return self + (-LaurentPoly.lift(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return LaurentPoly.lift(other) - self

    def __mul__(self, other) -> "LaurentPoly":
        other = LaurentPoly.lift(other)
        out: dict[int, Fraction] = {}
        for e1, c1 in self._c.items():
            for e2, c2 in other._c.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def diff(self) -> "LaurentPoly":
        return LaurentPoly({e - 1: e * c for e, c in self._c.items() if e != 0})

    def __call__(self, t):
        return sum((c * t**e for e, c in self._c.items()), 0)

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.const(other)
        return self._c == other._c

    def __hash__(self):
        return hash(tuple(self.items()))

    def __bool__(self):
        return bool(self._c)

    def __repr__(self):
        if not self._c:
            return "0"
        return " + ".join(f"({c})t^{e}" for e, c in self.items())


Matrix = list[list[LaurentPoly]]


def _zero() -> LaurentPoly:
    return LaurentPoly()


def mat(rows: Iterable[Iterable]) -> Matrix:
    return [[LaurentPoly.lift(x) for x in row] for row in rows]


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    n = len(A)
    return [
        [sum((A[i][k] * B[k][j] for k in range(n)), _zero()) for j in range(n)] for i in range(n)
    ]


def mat_add(A: Matrix, B: Matrix, sign: int = 1) -> Matrix:
    return [[a + b * sign for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def identity(n: int) -> Matrix:
    return [[LaurentPoly.const(int(i == j)) for j in range(n)] for i in range(n)]


def unipotent_inverse(g: Matrix) -> Matrix:
    """Inverse of an upper-unipotent matrix via the finite Neumann series."""
    n = len(g)
    N = mat_add(g, identity(n), -1)
    out = identity(n)
    term = identity(n)
    for _ in range(n - 1):
        term = mat_mul(term, N)
        term = [[-x for x in row] for row in term]
        out = mat_add(out, term)
    return out


class MatrixDiffOp:
    """The operator d_t + M(t)."""

    def __init__(self, M: Sequence[Sequence]):
        self.M = mat(M)
        self.r = len(self.M)
        if any(len(row) != self.r for row in self.M):
            raise ValueError("M must be square")
        if self.r > MAX_RANK:
            raise ValueError(f"rank {self.r} exceeds {MAX_RANK}")

    def check_prereduced(self) -> None:
        r = self.r
        for i in range(r):
            for j in range(r):
                if i == j + 1:
                    if self.M[i][j] != 1:
                        raise ValueError(f"subdiagonal entry ({i + 1},{j + 1}) must be 1")
                elif i > j + 1 and self.M[i][j]:
                    raise ValueError(f"entry ({i + 1},{j + 1}) below the subdiagonal must vanish")
        tr = sum((self.M[i][i] for i in range(r)), _zero())
        if tr:
            raise ValueError("M must be traceless")

    def gauge(self, g: Matrix) -> "MatrixDiffOp":
        """g (d + M) g^-1 = d + g M g^-1 - g' g^-1, for g upper unipotent."""
        gi = unipotent_inverse(g)
        gp = [[x.diff() for x in row] for row in g]
        newM = mat_add(mat_mul(mat_mul(g, self.M), gi), mat_mul(gp, gi), -1)
        return MatrixDiffOp(newM)

    def __eq__(self, other):
        return isinstance(other, MatrixDiffOp) and self.M == other.M


def canonical_form(op: MatrixDiffOp) -> list[LaurentPoly]:
    """Gauge away every entry of rows 2..r, bottom row first; read off row 1.

    Clearing entry (k, j), j >= k, uses g = 1 + c E_{k-1, j} with c = M_{kj};
    this only touches row k-1 and column j above row k, so finished rows stay
    clean.  The result is v_m = M_{1, m+1}, m = 1..r-1.
    """
    op.check_prereduced()
    r = op.r
    cur = op
    for k in range(r - 1, 0, -1):  # 0-based row index
        for j in range(k, r):
            c = cur.M[k][j]
            if not c:
                continue
            g = identity(r)
            g[k - 1][j] = c
            cur = cur.gauge(g)
    for k in range(1, r):
        for j in range(k, r):
            assert not cur.M[k][j]
    assert not cur.M[0][0]
    return [cur.M[0][m] for m in range(1, r)]


def scalar_operator(op: MatrixDiffOp) -> list[LaurentPoly]:
    """Monic scalar operator satisfied by the last component of (d + M) Y = 0.

    Independent of canonical_form: row k reads Y_k' + Y_{k-1} + sum_{j>=k} M_kj Y_j = 0,
    which expresses Y_{k-1} through y = Y_r; the first row is the equation.
    """
    op.check_prereduced()
    r = op.r
    # Y[k] as an operator on y: list of coefficients
    Y: list[list[LaurentPoly]] = [None] * r  # type: ignore[list-item]
    Y[r - 1] = [LaurentPoly.const(1)]
    for k in range(r - 1, 0, -1):
        acc = _op_diff(Y[k])
        for j in range(k, r):
            acc = _op_add(acc, _op_scale(op.M[k][j], Y[j]))
        Y[k - 1] = [-c for c in acc]
    eq = _op_diff(Y[0])
    for j in range(r):
        eq = _op_add(eq, _op_scale(op.M[0][j], Y[j]))
    lead = eq[-1]
    sign = lead.coeff(0)
    assert lead == LaurentPoly.const(sign) and abs(sign) == 1
    return [c * sign for c in eq]


def v_from_scalar(coeffs: Sequence[LaurentPoly]) -> list[LaurentPoly]:
    """d^r - v_1 d^(r-2) + ... : v_m = (-1)^m * coefficient of d^(r-m-1)."""
    r = len(coeffs) - 1
    if coeffs[r - 1]:
        raise ValueError("operator has a nonzero subleading term")
    return [coeffs[r - m - 1] * (-1) ** m for m in range(1, r)]


def _op_add(a, b):
    n = max(len(a), len(b))
    a = list(a) + [_zero()] * (n - len(a))
    b = list(b) + [_zero()] * (n - len(b))
    return [x + y for x, y in zip(a, b)]


def _op_scale(f: LaurentPoly, a):
    return [f * c for c in a]


def _op_diff(a):
    """d o (sum c_k d^k) = sum (c_k' d^k + c_k d^(k+1))."""
    out = [c.diff() for c in a] + [_zero()]
    for k, c in enumerate(a):
        out[k + 1] = out[k + 1] + c
    return out


def miura(us: Sequence) -> list[LaurentPoly]:
    """Coefficients of (d - u_1)(d - u_2)...(d - u_r), lowest order first."""
    us = [LaurentPoly.lift(u) for u in us]
    r = len(us)
    if r > MAX_RANK:
        raise ValueError(f"rank {r} exceeds {MAX_RANK}")
    if sum(us, _zero()):
        raise ValueError("Miura data must be traceless")
    acc = [LaurentPoly.const(1)]
    for u in reversed(us):
        acc = _op_add(_op_diff(acc), _op_scale(-u, acc))
    return acc


def c_of_nu(nu: Sequence) -> list[Fraction]:
    """c_1..c_{r-1} with (d - nu_1/z)...(d - nu_r/z) = d^r + sum (-1)^i c_i z^-(i+1) d^(r-i-1).

    Computed by acting on z^s: each factor multiplies by (s - nu) and lowers the
    power, so the product sends z^s to prod_i (s - i' - nu) z^(s-r); matching
    against the left side gives a triangular system in the falling factorials.
    """
    nu = [Fraction(x) for x in nu]
    r = len(nu)
    if sum(nu) != 0:
        raise ValueError("nu must sum to zero")
    if r > MAX_RANK:
        raise ValueError(f"rank {r} exceeds {MAX_RANK}")

    def product_poly():
        # coefficients in s of prod_{m=0}^{r-1} (s - (r-1-m) - nu_{m+1}) -- factor m acts after m' > m
        poly = [Fraction(1)]
        for m in range(r):
            shift = r - 1 - m
            root = shift + nu[m]
            poly = [
                (poly[i - 1] if i > 0 else 0) - root * (poly[i] if i < len(poly) else 0)
                for i in range(len(poly) + 1)
            ]
        return poly

    def falling(j):
        # s(s-1)...(s-j+1) as coefficients in s
        poly = [Fraction(1)]
        for m in range(j):
            poly = [
                (poly[i - 1] if i > 0 else 0) - m * (poly[i] if i < len(poly) else 0)
                for i in range(len(poly) + 1)
            ]
        return poly

    target = product_poly()
    # left side acting on z^s: falling(r) + sum_i (-1)^i c_i falling(r-i-1)
    resid = [t - f for t, f in zip(target, falling(r) + [0] * (len(target) - r - 1))]
    cs = [Fraction(0)] * r
    for i in range(1, r):
        deg = r - i - 1
        fi = falling(deg)
        coef = resid[deg] / fi[deg]
        cs[i] = coef * (-1) ** i
        resid = [a - coef * (fi[j] if j < len(fi) else 0) for j, a in enumerate(resid)]
    if any(resid):
        raise ArithmeticError("c(nu) system is inconsistent")
    return cs[1:]
