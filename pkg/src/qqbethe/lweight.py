"""Exact arithmetic with l-weight monomials and formal Grothendieck elements.

A spectral point is ``a0 * q**k`` with ``k`` an integer or half-integer, so
``Psi[i, k]`` stands for the prefundamental l-weight (1 - z a0 q^k) at node i.
Weights are stored in the fundamental-weight basis with rational entries.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping

from .liedata import AlgebraData

Shift = Fraction


def shift(k) -> Fraction:
    k = Fraction(k)
    if k.denominator not in (1, 2):
        raise ValueError(f"shift {k} is off the half-integer q-lattice")
    return k


class PsiMonomial:
    """Sparse product of Psi[i, k]**e with no zero exponents."""

    __slots__ = ("_items", "_hash")

    def __init__(self, exps: Mapping[tuple[int, Fraction], int] | None = None):
        items = {}
        for (i, k), e in (exps or {}).items():
            if e:
                key = (int(i), shift(k))
                items[key] = items.get(key, 0) + e
        self._items = tuple(sorted((key, e) for key, e in items.items() if e))
        self._hash = hash(self._items)

    @classmethod
    def _raw(cls, items):
        obj = cls.__new__(cls)
        obj._items = items
        obj._hash = hash(items)
        return obj

    def items(self):
        return self._items

    def as_dict(self) -> dict[tuple[int, Fraction], int]:
        return dict(self._items)

    def __mul__(self, other: "PsiMonomial") -> "PsiMonomial":
        if not other._items:
            return self
        if not self._items:
            return other
        d = dict(self._items)
        for key, e in other._items:
            v = d.get(key, 0) + e
            if v:
                d[key] = v
            else:
                del d[key]
        return PsiMonomial._raw(tuple(sorted(d.items())))

    def inverse(self) -> "PsiMonomial":
        return PsiMonomial._raw(tuple((key, -e) for key, e in self._items))

    def __pow__(self, n: int) -> "PsiMonomial":
        if n == 0:
            return PsiMonomial()
        return PsiMonomial._raw(tuple((key, e * n) for key, e in self._items))

    def __eq__(self, other):
        return isinstance(other, PsiMonomial) and self._items == other._items

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self._items < other._items

    def __bool__(self):
        return bool(self._items)

    def shifts(self) -> list[Fraction]:
        return [k for (_, k), _ in self._items]

    def __repr__(self):
        return f"PsiMonomial({format_psi(self)!r})"


class LWeightTerm:
    """An l-weight monomial together with a constant weight part."""

    __slots__ = ("psi", "weight", "_hash")

    def __init__(self, psi: PsiMonomial, weight: Iterable):
        self.psi = psi
        self.weight = tuple(Fraction(w) for w in weight)
        for w in self.weight:
            if w.denominator not in (1, 2):
                raise ValueError(f"weight coordinate {w} has denominator > 2")
        self._hash = hash((psi, self.weight))

    @classmethod
    def identity(cls, rank: int) -> "LWeightTerm":
        return cls(PsiMonomial(), (0,) * rank)

    def _check(self, other):
        if len(self.weight) != len(other.weight):
            raise ValueError("terms belong to algebras of different rank")

    def __mul__(self, other: "LWeightTerm") -> "LWeightTerm":
        self._check(other)
        return LWeightTerm(
            self.psi * other.psi, tuple(a + b for a, b in zip(self.weight, other.weight))
        )

    def inverse(self) -> "LWeightTerm":
        return LWeightTerm(self.psi.inverse(), tuple(-a for a in self.weight))

    def __pow__(self, n: int) -> "LWeightTerm":
        if n < 0:
            return self.inverse() ** (-n)
        return LWeightTerm(self.psi**n, tuple(a * n for a in self.weight))

    def __truediv__(self, other: "LWeightTerm") -> "LWeightTerm":
        return self * other.inverse()

    def is_identity(self) -> bool:
        return not self.psi and not any(self.weight)

    def __eq__(self, other):
        return (
            isinstance(other, LWeightTerm)
            and self.psi == other.psi
            and self.weight == other.weight
        )

    def __hash__(self):
        return self._hash

    def sort_key(self):
        return (self.psi.items(), self.weight)

    def __repr__(self):
        return f"LWeightTerm({format_term(self)!r})"


class GrothElement:
    """Finite Z-linear combination of LWeightTerms."""

    __slots__ = ("rank", "_c")

    def __init__(self, rank: int, coeffs: Mapping[LWeightTerm, int] | None = None):
        self.rank = rank
        self._c: dict[LWeightTerm, int] = {}
        for t, c in (coeffs or {}).items():
            if c:
                self._c[t] = self._c.get(t, 0) + c
        self._c = {t: c for t, c in self._c.items() if c}

    @classmethod
    def from_term(cls, term: LWeightTerm, coeff: int = 1) -> "GrothElement":
        return cls(len(term.weight), {term: coeff})

    @classmethod
    def one(cls, rank: int) -> "GrothElement":
        return cls(rank, {LWeightTerm.identity(rank): 1})

    def items(self):
        return self._c.items()

    def terms(self):
        return list(self._c)

    def coeff(self, term: LWeightTerm) -> int:
        return self._c.get(term, 0)

    def __len__(self):
        return len(self._c)

    def __bool__(self):
        return bool(self._c)

    def _lift(self, other) -> "GrothElement":
        if isinstance(other, LWeightTerm):
            return GrothElement.from_term(other)
        if isinstance(other, int):
            return GrothElement(self.rank, {LWeightTerm.identity(self.rank): other})
        if other.rank != self.rank:
            raise ValueError("elements belong to algebras of different rank")
        return other

    def __add__(self, other) -> "GrothElement":
        other = self._lift(other)
        out = dict(self._c)
        for t, c in other._c.items():
            v = out.get(t, 0) + c
            if v:
                out[t] = v
            else:
                out.pop(t, None)
        return GrothElement(self.rank, out)

    __radd__ = __add__

    def __neg__(self) -> "GrothElement":
        return GrothElement(self.rank, {t: -c for t, c in self._c.items()})

    def __sub__(self, other) -> "GrothElement":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "GrothElement":
        return self._lift(other) - self

    def __mul__(self, other) -> "GrothElement":
        if isinstance(other, int):
            return GrothElement(self.rank, {t: c * other for t, c in self._c.items()})
        other = self._lift(other)
        out: dict[LWeightTerm, int] = {}
        for t1, c1 in self._c.items():
            for t2, c2 in other._c.items():
                t = t1 * t2
                out[t] = out.get(t, 0) + c1 * c2
        return GrothElement(self.rank, out)

    def __rmul__(self, other) -> "GrothElement":
        if isinstance(other, int):
            return self * other
        return self._lift(other) * self

    def __pow__(self, n: int) -> "GrothElement":
        if n < 0:
            raise ValueError("GrothElement has no general inverse")
        out = GrothElement.one(self.rank)
        for _ in range(n):
            out = out * self
        return out

    def filter(self, keep) -> "GrothElement":
        return GrothElement(self.rank, {t: c for t, c in self._c.items() if keep(t)})

    def __eq__(self, other):
        if isinstance(other, int):
            other = GrothElement.one(self.rank) * other
        return isinstance(other, GrothElement) and self._c == other._c

    def sorted_items(self):
        return sorted(self._c.items(), key=lambda tc: tc[0].sort_key())

    def __repr__(self):
        return f"GrothElement({format_groth(self)!r})"


# -- building blocks -------------------------------------------------------


def _zero(alg: AlgebraData) -> tuple[Fraction, ...]:
    return (Fraction(0),) * alg.rank


def psi(alg: AlgebraData, i: int, k, power: int = 1) -> LWeightTerm:
    _node(alg, i)
    return LWeightTerm(PsiMonomial({(i, shift(k)): power}), _zero(alg))


def bracket(alg: AlgebraData, w) -> LWeightTerm:
    w = tuple(w)
    if len(w) != alg.rank:
        raise ValueError("weight vector has wrong length")
    return LWeightTerm(PsiMonomial(), w)


def alpha(alg: AlgebraData, i: int, scale=1) -> tuple[Fraction, ...]:
    """alpha_i in the omega basis: coordinates C_{j,i}."""
    _node(alg, i)
    s = Fraction(scale)
    return tuple(s * alg.C(j, i) for j in alg.nodes())


def omega(alg: AlgebraData, i: int, scale=1) -> tuple[Fraction, ...]:
    _node(alg, i)
    return tuple(Fraction(scale) if j == i else Fraction(0) for j in alg.nodes())


def _node(alg: AlgebraData, i: int) -> None:
    if not 1 <= i <= alg.rank:
        raise ValueError(f"node {i} out of range for {alg.name}")


def y_tilde(alg: AlgebraData, i: int, k) -> LWeightTerm:
    d = alg.d(i)
    k = shift(k)
    return psi(alg, i, k - d) * psi(alg, i, k + d, -1)


def y_monomial(alg: AlgebraData, i: int, k) -> LWeightTerm:
    return bracket(alg, omega(alg, i)) * y_tilde(alg, i, k)


def a_monomial(alg: AlgebraData, i: int, k) -> LWeightTerm:
    """A_{i,k} assembled from Y-variables."""
    d = alg.d(i)
    k = shift(k)
    out = y_monomial(alg, i, k - d) * y_monomial(alg, i, k + d)
    for j in alg.neighbors(i):
        c = alg.C(j, i)
        if c == -1:
            sh = [0]
        elif c == -2:
            sh = [-1, 1]
        elif c == -3:
            sh = [-2, 0, 2]
        else:
            raise ValueError(f"unexpected Cartan entry {c}")
        for s in sh:
            out = out * y_monomial(alg, j, k + s).inverse()
    return out


def a_tilde(alg: AlgebraData, i: int, k) -> LWeightTerm:
    return bracket(alg, alpha(alg, i, -1)) * a_monomial(alg, i, k)


def a_tilde_direct(alg: AlgebraData, i: int, k) -> LWeightTerm:
    """Ã_{i,k} written directly in Psi variables (independent route)."""
    di = alg.d(i)
    k = shift(k)
    out = psi(alg, i, k - 2 * di) * psi(alg, i, k + 2 * di, -1)
    for j in alg.neighbors(i):
        s = alg.d(j) if alg.d(j) > 1 else di
        out = out * psi(alg, j, k - s, -1) * psi(alg, j, k + s)
    return out


def psi_tilde(alg: AlgebraData, i: int, k) -> LWeightTerm:
    di = alg.d(i)
    k = shift(k)
    out = psi(alg, i, k, -1)
    for j in alg.neighbors(i):
        c = alg.C(i, j)
        if c == -1:
            sh = [di]
        elif c == -2:
            sh = [0, 2]
        else:
            sh = [-1, 1, 3]
        for s in sh:
            out = out * psi(alg, j, k + s)
    return out


# -- serialization ---------------------------------------------------------


def _fmt_shift(k: Fraction) -> str:
    s = "+" if k > 0 else ("-" if k < 0 else "")
    a = abs(k)
    return s + (str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}")


def format_psi(m: PsiMonomial) -> str:
    parts = []
    for (i, k), e in m.items():
        p = f"P[{i},{_fmt_shift(k)}]"
        if e != 1:
            p += f"^{e}"
        parts.append(p)
    return " ".join(parts) if parts else "1"


def format_term(t: LWeightTerm) -> str:
    return f"{format_psi(t.psi)} @w({','.join(str(w) for w in t.weight)})"


def format_groth(g: GrothElement) -> str:
    if not g:
        return "0"
    return " ; ".join(f"{c:+d} {format_term(t)}" for t, c in g.sorted_items())


_PSI_RE = re.compile(r"P\[(\d+),([+-]?\d+(?:/2)?)\](?:\^(-?\d+))?")


def parse_term(text: str) -> LWeightTerm:
    text = text.strip()
    if "@w(" not in text or not text.endswith(")"):
        raise ValueError(f"malformed term {text!r}")
    head, w = text.rsplit("@w(", 1)
    weight = tuple(Fraction(x) for x in w[:-1].split(","))
    head = head.strip()
    exps: dict = {}
    if head != "1":
        pos = 0
        for m in _PSI_RE.finditer(head):
            if head[pos:m.start()].strip():
                raise ValueError(f"malformed monomial {head!r}")
            pos = m.end()
            key = (int(m.group(1)), Fraction(m.group(2)))
            exps[key] = exps.get(key, 0) + int(m.group(3) or 1)
        if head[pos:].strip():
            raise ValueError(f"malformed monomial {head!r}")
    return LWeightTerm(PsiMonomial(exps), weight)


def parse_groth(text: str, rank: int) -> GrothElement:
    text = text.strip()
    if text == "0":
        return GrothElement(rank)
    out = GrothElement(rank)
    for chunk in text.split(" ; "):
        c, t = chunk.strip().split(" ", 1)
        out = out + GrothElement.from_term(parse_term(t), int(c))
    return out


def _inverse_cartan(alg: AlgebraData) -> list[list[Fraction]]:
    n = alg.rank
    m = [[Fraction(alg.C(i, j)) for j in alg.nodes()] + [Fraction(int(i == j)) for j in alg.nodes()]
         for i in alg.nodes()]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [row[n:] for row in m]


_CINV: dict[str, list[list[Fraction]]] = {}


def alpha_coordinates(alg: AlgebraData, w) -> tuple[Fraction, ...]:
    """Coordinates of an omega-basis weight in the simple-root basis."""
    inv = _CINV.get(alg.name)
    if inv is None:
        inv = _CINV[alg.name] = _inverse_cartan(alg)
    # w = C c  (alpha_i has omega-coordinates C_{j,i})
    return tuple(sum(inv[i][j] * w[j] for j in range(alg.rank)) for i in range(alg.rank))


def height(alg: AlgebraData, w) -> Fraction:
    return sum(alpha_coordinates(alg, w), Fraction(0))
