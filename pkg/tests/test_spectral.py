import math
import warnings

import numpy as np
import pytest

from qqbethe.operkit import _ode_py
from qqbethe.operkit.spectral import (
    QFunction, ResonanceWarning, bae_ratio_check, default_x_max, fd_eigenvalues, find_q_zeros,
    harmonic_zeros, q_of_e, ratio_spread,
)


@pytest.fixture(scope="module")
def harmonic():
    qf = QFunction(1.0, 0.3)
    find_q_zeros(qf, 21.0, 5)
    return qf


def test_harmonic_zeros(harmonic):
    assert harmonic_zeros(0.3, 3) == pytest.approx([3.6, 7.6, 11.6])
    assert len(harmonic.zeros) == 5
    assert max(abs(a - b) for a, b in zip(harmonic.zeros, harmonic_zeros(0.3, 5))) < 1e-9


def test_fd_oracle():
    ev = fd_eigenvalues(1.0, 0.3, 5)
    assert np.max(np.abs(ev - harmonic_zeros(0.3, 5))) < 1e-6


def test_q_is_real_on_real_axis(harmonic):
    for E in (1.0, 5.0, 13.3):
        val = harmonic(E)
        assert abs(val.imag) <= 1e-9 * abs(val)


def test_x_max_floor():
    assert default_x_max(5.0, 1.0) == pytest.approx(20.0)
    assert default_x_max(5.0, 2.4) < 10


def test_cache():
    qf = QFunction(1.0, 0.3)
    a = qf(2.0)
    assert qf(2.0) == a and qf.cache_size() == 1


def test_pure_kernel_agrees():
    a = q_of_e(5.0 + 1j, 2.4, 0.3)
    b = q_of_e(5.0 + 1j, 2.4, 0.3, backend=_ode_py)
    assert abs(a - b) <= 1e-9 * abs(a)


def test_resonance_warning():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        QFunction(1.0, 0.5)
    assert any(issubclass(w.category, ResonanceWarning) for w in rec)


@pytest.fixture(scope="module")
def anharmonic():
    qf = QFunction(2.4, 0.3)
    find_q_zeros(qf, 80.0, 6)
    return qf


def test_ratio_constancy(anharmonic):
    assert len(anharmonic.zeros) == 6
    rep = bae_ratio_check(anharmonic)
    assert rep.spread < 1e-3
    assert rep.refinement_change < 1e-6
    assert rep.orientation == "-q^(2l+1)"
    assert abs(rep.constant - rep.predicted_plus) < 1e-6


def test_ratio_perturbation_degrades(anharmonic):
    base = bae_ratio_check(anharmonic, certify=False).spread
    zeros = list(anharmonic.zeros)
    qf = QFunction(2.4, 0.3)
    qf.zeros = [zeros[0]] + [zeros[1] * 1.01] + zeros[2:]
    assert bae_ratio_check(qf, certify=False).spread >= 10 * max(base, 1e-12)


def test_ratio_rejects_real_q2(anharmonic):
    with pytest.raises(ValueError):
        bae_ratio_check(anharmonic, beta2=0.5)
    with pytest.raises(ValueError):
        bae_ratio_check(QFunction(2.4, 0.3))


def test_ratio_spread_definition():
    assert ratio_spread([2, 2, 2.2]) == pytest.approx(0.1)
    assert math.isclose(ratio_spread([1j, 1j]), 0.0)
