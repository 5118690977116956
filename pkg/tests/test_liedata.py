from fractions import Fraction
from math import gcd
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qqbethe.liedata import (
    SUPPORTED, all_algebras, check_invariants, dual_alpha, fold_twisted, load_algebra, parse_name,
)


def test_a1_forced():
    a = load_algebra("A", 1)
    assert a.cartan == ((2,),)
    assert a.sym == (1,)
    assert a.bmatrix == ((2,),)
    assert a.dual_coxeter == 2


def test_a2_simply_laced():
    a = load_algebra("A", 2)
    assert a.cartan == ((2, -1), (-1, 2))
    assert a.sym == (1, 1)


def test_g2_symmetrizer_is_forced():
    g = load_algebra("G2")
    C = np.array(g.cartan)
    # solve d_1 C_12 = d_2 C_21 with coprime positive d by brute force
    sols = [(d1, d2) for d1 in range(1, 10) for d2 in range(1, 10)
            if d1 * C[0, 1] == d2 * C[1, 0] and gcd(d1, d2) == 1]
    assert sols == [tuple(g.sym)]
    assert g.exponents == (1, 5)
    assert (g.coxeter, g.dual_coxeter) == (6, 4)


def test_every_table_entry_is_consistent():
    algs = all_algebras()
    assert len(algs) == sum(len(r) for r in SUPPORTED.values())
    for alg in algs:
        assert check_invariants(alg) == [], alg.name
        B = np.array(alg.bmatrix)
        assert (B == B.T).all()
        assert reduce(gcd, alg.sym) == 1
        assert round(abs(np.linalg.det(alg.cartan_array()))) > 0
        assert len(alg.exponents) == alg.rank
        assert alg.kac_labels[0] == 1


def test_d4_exponent_multiset():
    assert sorted(load_algebra("D4").exponents) == [1, 3, 3, 5]


def test_long_short_convention():
    # B_n: last node short; C_n: last node long
    assert load_algebra("B3").sym == (2, 2, 1)
    assert load_algebra("C3").sym == (1, 1, 2)
    assert load_algebra("F4").sym == (2, 2, 1, 1)


@pytest.mark.parametrize("name", ["A9", "B5", "D3", "E5", "F3", "G3", "X2"])
def test_unsupported_rejected(name):
    with pytest.raises(ValueError):
        load_algebra(name)


def test_parse_name():
    assert parse_name("e8") == ("E", 8)
    with pytest.raises(ValueError):
        parse_name("E")


def test_fold_a3():
    f = fold_twisted(load_algebra("A3"), (3, 2, 1))
    assert f.orbits == ((1, 3), (2,))
    assert f.sym == (1, 2)
    assert f.order == 2


def test_fold_a2():
    f = fold_twisted(load_algebra("A2"), (2, 1))
    assert len(f.orbits) == 1
    assert f.sym == (Fraction(1, 2),)


def test_fold_d4_triality():
    f = fold_twisted(load_algebra("D4"), (3, 2, 4, 1))
    assert f.order == 3
    assert set(f.sym) <= {3, 1, Fraction(1, 2)}
    assert sorted(x for o in f.orbits for x in o) == [1, 2, 3, 4]


def test_fold_rejections():
    a3 = load_algebra("A3")
    with pytest.raises(ValueError, match="order"):
        fold_twisted(a3, (1, 2, 3))
    with pytest.raises(ValueError, match="automorphism"):
        fold_twisted(a3, (2, 1, 3))
    with pytest.raises(ValueError):
        fold_twisted(load_algebra("B3"), (1, 2, 3))


def test_fold_e6():
    f = fold_twisted(load_algebra("E6"), (5, 4, 3, 2, 1, 6))
    assert f.order == 2
    assert len(f.orbits) == 4


def test_dual_alpha_examples():
    assert dual_alpha(1, 1) == Fraction(-1, 2)
    assert dual_alpha(0, 1) == 0
    assert dual_alpha(Fraction(-1, 2), 2) == 0
    with pytest.raises(ValueError):
        dual_alpha(-1)


@given(st.fractions().filter(lambda a: a != -1))
def test_dual_alpha_involution(a):
    assert dual_alpha(dual_alpha(a, 1), 1) == a
