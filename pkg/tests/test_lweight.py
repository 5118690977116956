from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qqbethe.liedata import load_algebra
from qqbethe.lweight import (
    GrothElement, LWeightTerm, PsiMonomial, a_monomial, a_tilde, a_tilde_direct, alpha, bracket,
    format_groth, format_term, parse_groth, parse_term, psi, psi_tilde, shift, y_tilde,
)

A1 = load_algebra("A1")
A2 = load_algebra("A2")
ALGS = [load_algebra(n) for n in ("A1", "A2", "B2", "B3", "C3", "D4", "G2", "F4")]


def pm(*pairs):
    """Psi monomial from (node, shift, exponent) triples."""
    return PsiMonomial({(i, Fraction(k)): e for i, k, e in pairs})


def test_shift_lattice():
    assert shift(3) == 3
    assert shift(Fraction(1, 2)) == Fraction(1, 2)
    with pytest.raises(ValueError):
        shift(Fraction(1, 3))


def test_group_basics():
    one = LWeightTerm.identity(2)
    assert psi(A2, 1, 0) * psi(A2, 1, 0).inverse() == one
    half = bracket(A2, alpha(A2, 1, Fraction(1, 2)))
    assert half * bracket(A2, alpha(A2, 1, Fraction(-1, 2))) == one


def test_ring_square():
    x = GrothElement.from_term(psi(A2, 1, 0))
    y = GrothElement.from_term(psi(A2, 2, 1))
    lhs = (x + y) ** 2
    rhs = x * x + 2 * (x * y) + y * y
    assert lhs == rhs
    assert lhs.coeff(psi(A2, 1, 0) * psi(A2, 2, 1)) == 2


def test_rank_mismatch_rejected():
    with pytest.raises(ValueError):
        psi(A1, 1, 0) * psi(A2, 1, 0)


def test_y_tilde_sl2():
    t = y_tilde(A1, 1, 0)
    assert t.psi == pm((1, -1, 1), (1, 1, -1))
    assert t.weight == (0,)
    assert y_tilde(A1, 1, 0) * y_tilde(A1, 1, 0).inverse() == LWeightTerm.identity(1)
    assert {i for i, _ in y_tilde(A2, 1, 5).psi.as_dict()} == {1}


def test_a_tilde_examples():
    assert a_tilde(A1, 1, 0).psi == pm((1, -2, 1), (1, 2, -1))
    assert a_tilde(A2, 1, 0).psi == pm((1, -2, 1), (1, 2, -1), (2, -1, -1), (2, 1, 1))


def test_a_tilde_two_routes_agree():
    for alg in ALGS:
        for i in alg.nodes():
            for k in (-3, 0, 2):
                assert a_tilde(alg, i, k) == a_tilde_direct(alg, i, k), (alg.name, i, k)
                assert a_monomial(alg, i, k) == bracket(alg, alpha(alg, i)) * a_tilde(alg, i, k)


def test_psi_tilde_examples():
    assert psi_tilde(A1, 1, 0).psi == pm((1, 0, -1))
    assert psi_tilde(A2, 1, 0).psi == pm((1, 0, -1), (2, 1, 1))
    b2 = load_algebra("B2")
    # the node carrying C_ij = -2
    i = next(i for i in b2.nodes() for j in b2.nodes() if b2.C(i, j) == -2)
    j = next(j for j in b2.nodes() if b2.C(i, j) == -2)
    d = psi_tilde(b2, i, 0).psi.as_dict()
    assert d[(j, 0)] == 1 and d[(j, 2)] == 1


def test_weights():
    for alg in ALGS:
        zero = (0,) * alg.rank
        for i in alg.nodes():
            assert a_monomial(alg, i, 1).weight == alpha(alg, i)
            for t in (y_tilde(alg, i, 0), a_tilde(alg, i, 0), psi(alg, i, 0), psi_tilde(alg, i, 0)):
                assert t.weight == zero


@pytest.mark.parametrize("name", ["A2", "B2", "G2"])
def test_telescoping_support(name):
    alg = load_algebra(name)
    for i in alg.nodes():
        d = alg.d(i)
        for k in (0, 1):
            for R in range(1, 11):
                prod = LWeightTerm.identity(alg.rank)
                for K in range(1, R + 1):
                    prod = prod * a_tilde(alg, i, k + 2 * d * K).inverse() * y_tilde(alg, i, k + (2 * K + 1) * d)
                ratio = prod / psi_tilde(alg, i, k)
                assert all(s > k + 2 * d * (R - 1) - 4 * d for s in ratio.psi.shifts())
                assert ratio.weight == (0,) * alg.rank


def test_serialization_roundtrip():
    t = psi(A2, 1, -1) * psi(A2, 1, 1, -1) * bracket(A2, alpha(A2, 1, Fraction(1, 2)))
    text = format_term(t)
    assert text.startswith("P[1,-1] P[1,+1]^-1 @w(")
    assert parse_term(text) == t
    g = GrothElement.from_term(t, 3) - GrothElement.from_term(psi(A2, 2, 0))
    assert parse_groth(format_groth(g), 2) == g
    assert format_groth(g) == format_groth(parse_groth(format_groth(g), 2))


# -- randomized group and ring laws --------------------------------------------

terms = st.builds(
    lambda items, w: LWeightTerm(
        PsiMonomial({(i, Fraction(k)): e for i, k, e in items}), [Fraction(x, 2) for x in w]
    ),
    st.lists(st.tuples(st.integers(1, 2), st.integers(-4, 4), st.integers(-2, 2)), max_size=4),
    st.lists(st.integers(-4, 4), min_size=2, max_size=2),
)
elements = st.lists(st.tuples(terms, st.integers(-3, 3)), max_size=4).map(
    lambda pairs: sum((GrothElement.from_term(t, c) for t, c in pairs), GrothElement(2))
)


@given(terms, terms, terms)
def test_term_group_laws(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * a.inverse() == LWeightTerm.identity(2)
    assert (a * b) ** 2 == a**2 * b**2


@settings(max_examples=50)
@given(elements, elements, elements)
def test_ring_laws(x, y, z):
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x
    assert x - x == GrothElement(2)
    assert parse_groth(format_groth(x), 2) == x
