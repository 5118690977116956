"""Cartan data for finite simple types and twisted foldings.

Tables live in ``data/algebras.txt`` and are parsed once at first use.
Node numbering follows Kac's affine diagrams (see README).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np

SUPPORTED = {
    "A": range(1, 9),
    "B": range(2, 5),
    "C": range(2, 5),
    "D": range(4, 6),
    "E": range(6, 9),
    "F": range(4, 5),
    "G": range(2, 3),
}


@dataclass(frozen=True)
class AlgebraData:
    type_tag: str
    rank: int
    cartan: tuple[tuple[int, ...], ...]
    sym: tuple[int, ...]
    exponents: tuple[int, ...]
    coxeter: int
    dual_coxeter: int
    kac_labels: tuple[int, ...]  # a_0, a_1, ..., a_n

    @property
    def name(self) -> str:
        return f"{self.type_tag}{self.rank}"

    @property
    def bmatrix(self) -> tuple[tuple[int, ...], ...]:
        n = self.rank
        return tuple(
            tuple(self.sym[i] * self.cartan[i][j] for j in range(n)) for i in range(n)
        )

    def C(self, i: int, j: int) -> int:
        """Cartan entry with 1-based node labels."""
        return self.cartan[i - 1][j - 1]

    def d(self, i: int) -> int:
        return self.sym[i - 1]

    def B(self, i: int, j: int) -> int:
        return self.sym[i - 1] * self.cartan[i - 1][j - 1]

    def nodes(self) -> range:
        return range(1, self.rank + 1)

    def cartan_array(self) -> np.ndarray:
        return np.array(self.cartan, dtype=int)

    def neighbors(self, i: int) -> list[int]:
        return [j for j in self.nodes() if j != i and self.C(i, j) != 0]


def _ints(field: str) -> tuple[int, ...]:
    return tuple(int(x) for x in field.split(","))


def _parse_record(line: str) -> AlgebraData:
    head, crows, d, exps, h, hv, labels = (f.strip() for f in line.split("|"))
    tag, rank = head.split()
    cartan = tuple(_ints(row) for row in crows.split(";"))
    return AlgebraData(
        type_tag=tag,
        rank=int(rank),
        cartan=cartan,
        sym=_ints(d),
        exponents=_ints(exps),
        coxeter=int(h),
        dual_coxeter=int(hv),
        kac_labels=(1,) + _ints(labels),
    )


@lru_cache(maxsize=1)
def _table() -> dict[tuple[str, int], AlgebraData]:
    text = resources.files("qqbethe").joinpath("data/algebras.txt").read_text()
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rec = _parse_record(line)
        out[(rec.type_tag, rec.rank)] = rec
    return out


def parse_name(name: str) -> tuple[str, int]:
    """'G2' -> ('G', 2)."""
    name = name.strip()
    if len(name) < 2 or not name[1:].isdigit():
        raise ValueError(f"cannot parse algebra name {name!r}")
    return name[0].upper(), int(name[1:])


def load_algebra(type_tag: str, rank: int | None = None) -> AlgebraData:
    if rank is None:
        type_tag, rank = parse_name(type_tag)
    type_tag = type_tag.upper()
    if type_tag not in SUPPORTED or rank not in SUPPORTED[type_tag]:
        raise ValueError(
            f"unsupported algebra {type_tag}{rank}; supported: "
            + ", ".join(f"{t}{min(r)}..{t}{max(r)}" for t, r in SUPPORTED.items())
        )
    return _table()[(type_tag, rank)]


def all_algebras() -> list[AlgebraData]:
    return [load_algebra(t, n) for t, rs in SUPPORTED.items() for n in rs]


def check_invariants(alg: AlgebraData) -> list[str]:
    """Return a list of violated table invariants (empty when consistent)."""
    problems = []
    C = alg.cartan_array()
    n = alg.rank
    B = np.array(alg.bmatrix)
    if C.shape != (n, n):
        problems.append("cartan shape")
    if not (B == B.T).all():
        problems.append("B not symmetric")
    if any(C[i, i] != 2 for i in range(n)):
        problems.append("diagonal not 2")
    if any(C[i, j] > 0 for i in range(n) for j in range(n) if i != j):
        problems.append("positive off-diagonal")
    if any(x <= 0 for x in alg.sym) or math.gcd(*alg.sym) != 1:
        problems.append("d not relatively prime positive")
    if round(np.linalg.det(C)) == 0:
        problems.append("det C = 0")
    if len(alg.exponents) != n:
        problems.append("exponent count")
    if max(alg.exponents) != alg.coxeter - 1 or sum(alg.exponents) * 2 != n * alg.coxeter:
        problems.append("exponents vs Coxeter number")
    a = alg.kac_labels
    if a[0] != 1 or len(a) != n + 1:
        problems.append("Kac labels shape")
    if sum(a) != alg.coxeter:
        problems.append("h != sum of Kac labels")
    dmax = max(alg.sym)
    dual = Fraction(1) + sum(Fraction(a[i + 1] * alg.sym[i], dmax) for i in range(n))
    if dual != alg.dual_coxeter:
        problems.append("h_dual != sum of dual labels")
    # highest root theta = sum a_i alpha_i must have (theta, theta) = 2 d_max
    lab = np.array(a[1:])
    if int(lab @ B @ lab) != 2 * dmax:
        problems.append("theta not a long root")
    return problems


# -- twisted folding -------------------------------------------------------


@dataclass(frozen=True)
class TwistedFoldData:
    base: AlgebraData
    sigma: tuple[int, ...]  # 1-based images
    order: int
    orbits: tuple[tuple[int, ...], ...]
    representatives: tuple[int, ...]
    sym: tuple[Fraction, ...]

    def C(self, a: int, b: int) -> int:
        """Folded Cartan entry between orbits a, b (0-based orbit indices)."""
        return self.base.C(self.representatives[a], self.representatives[b])

    def neighbors(self, a: int) -> list[int]:
        return [b for b in range(len(self.orbits)) if b != a and self.C(a, b) < 0]


def fold_twisted(alg: AlgebraData, sigma) -> TwistedFoldData:
    n = alg.rank
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(1, n + 1)):
        raise ValueError("sigma is not a permutation of the nodes")
    if alg.type_tag not in "ADE" or (alg.type_tag == "E" and n != 6):
        raise ValueError("twisted folding needs type A, D or E6")
    for i in alg.nodes():
        for j in alg.nodes():
            if alg.C(sigma[i - 1], sigma[j - 1]) != alg.C(i, j):
                raise ValueError("sigma is not a diagram automorphism")
    order = 1
    p = list(sigma)
    while p != list(range(1, n + 1)):
        p = [sigma[x - 1] for x in p]
        order += 1
    if order not in (2, 3):
        raise ValueError(f"automorphism order {order} not in {{2, 3}}")

    orbits, seen = [], set()
    for i in alg.nodes():
        if i in seen:
            continue
        orb, x = [], i
        while x not in orb:
            orb.append(x)
            x = sigma[x - 1]
        seen.update(orb)
        orbits.append(tuple(sorted(orb)))

    def images(j):
        out, x = [], j
        for _ in range(order):
            out.append(x)
            x = sigma[x - 1]
        return out

    def admissible(reps):
        for i in reps:
            for j in reps:
                if i == j:
                    continue
                vals = [alg.C(i, x) for x in images(j)]
                if any(vals) and alg.C(i, j) != -1:
                    return False
        return True

    for reps in itertools.product(*orbits):
        if admissible(reps):
            break
    else:
        raise ValueError("no admissible choice of orbit representatives")

    sym = []
    for i in reps:
        c = alg.C(i, sigma[i - 1])
        sym.append({2: Fraction(order), 0: Fraction(1), -1: Fraction(1, 2)}[c])
    return TwistedFoldData(alg, sigma, order, tuple(orbits), tuple(reps), tuple(sym))


def dual_alpha(alpha, r_check: int = 1) -> Fraction:
    alpha = Fraction(alpha)
    if alpha == -1:
        raise ValueError("alpha = -1 has no dual")
    return 1 / (r_check * (alpha + 1)) - 1
