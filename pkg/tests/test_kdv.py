import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qqbethe.liedata import dual_alpha, load_algebra
from qqbethe.operkit.kdv import (
    KdvPotential, OperSpec, accessory_m1_closed_form, accessory_residual, alpha_of_k, as_fraction,
    central_charge, constants, delta_rk, general_constants, k_of_alpha, power_map, schwarzian,
    schwarzian_power, solve_accessory, x_potential, x_potential_from_z,
)

F = Fraction


def test_frozen_values():
    assert central_charge(0) == -2
    assert delta_rk(1, 1) == F(5, 12)
    assert alpha_of_k(0) == F(-1, 2)
    c = constants(F(3, 10), 1)
    assert c.alpha == F(-2, 3) and c.beta2 == 3
    with pytest.raises(ValueError):
        alpha_of_k(-2)


def test_float_inputs_are_exact():
    assert as_fraction(0.3) == F(3, 10)


rats = st.fractions(min_value=-5, max_value=5, max_denominator=12)


@given(rats.filter(lambda k: k not in (-2, -1)), rats)
def test_identities_exact(k, r):
    c = constants(r, k)
    assert k_of_alpha(c.alpha) == k
    assert c.beta2 * (c.alpha + 1) == 1
    assert c.central_charge == 1 - 6 * (k + 1) ** 2 / (k + 2)


@given(rats.filter(lambda a: a != -1))
def test_duality_involution(a):
    assert dual_alpha(dual_alpha(a)) == a
    b = dual_alpha(a)
    assert (a + 1) * (b + 1) == 1
    assert (dual_alpha(a, 2) + 1) * (a + 1) == F(1, 2)


def test_general_constants_sl2_reduces():
    g = general_constants(load_algebra("A1"), 1)
    assert g.alpha == alpha_of_k(1)
    g3 = general_constants(load_algebra("A2"), 1)
    assert g3.alpha == F(-3, 4)
    assert math.isclose(g3.dz_dx(1.3), (g3.z_of_x(1.3 + 1e-6) - g3.z_of_x(1.3 - 1e-6)) / 2e-6, rel_tol=1e-8)


def test_m1_closed_form():
    w = accessory_m1_closed_form(F(3, 10), 1)
    assert abs(w - 0.54) < 1e-14
    assert np.max(np.abs(accessory_residual(OperSpec(1, F(3, 10), (w,))))) < 1e-13


def test_solve_accessory_m1_and_m2():
    spec = OperSpec(1, F(3, 10))
    res = solve_accessory(spec, [0.8])
    assert res.converged and abs(res.w[0] - 0.54) < 1e-12
    spec2 = OperSpec(F(3, 2), F(1, 5))
    res2 = solve_accessory(spec2, [0.2 + 0.6j, 0.2 - 0.6j])
    assert res2.converged and res2.residual_max < 1e-12
    assert abs(res2.w[0] - res2.w[1].conjugate()) < 1e-10


def test_solve_accessory_rejections():
    with pytest.raises(ValueError):
        solve_accessory(OperSpec(1, 0), [])
    with pytest.raises(ValueError):
        OperSpec(1, 0, (0.0,))
    with pytest.raises(ValueError):
        OperSpec(1, 0, (1.0, 1.0))


def test_potential_local_expansion():
    pot = KdvPotential(OperSpec(1, F(3, 10), (0.54, 2 + 1j)))
    w = pot.w[0]
    for eps in (1e-3, 1e-4):
        z = w + eps
        d = z - w
        polar = 2 / d**2 + pot.a[0] / d
        assert abs(pot(z) - polar - pot.regular(0, z)) < 1e-7


def test_schwarzian_power_law():
    for a in (0.5, 2.0, 3.4):
        for x in (0.7, 1.9):
            assert abs(schwarzian(lambda y: y**a, x) - schwarzian_power(a, x)) < 1e-12


@pytest.mark.parametrize("w", [(), (0.54,), (0.3 + 0.8j, 0.3 - 0.8j)])
def test_coordinate_change_reproduces_x_form(w):
    spec = OperSpec.from_alpha_ell(F(12, 5), F(3, 10), w)
    phi = power_map(spec.alpha)
    for x in np.linspace(0.4, 2.5, 20):
        assert abs(phi.inverse(phi(x)) - x) < 1e-12
        E = 3.7 - 0.2j
        a, b = x_potential(spec, E, x), x_potential_from_z(spec, E, x)
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))
