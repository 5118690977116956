import os
import subprocess
import sys

import numpy as np

from qqbethe.operkit import _backend, _ode_py


def test_selected_backend_is_importable():
    assert _backend.BACKEND in ("cython", "python")


def test_env_switch_forces_python():
    env = dict(os.environ, QQBETHE_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "from qqbethe.operkit import _backend; print(_backend.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_radial_kernels_agree():
    args = (14.6 + 0j, 0.39, 2.4, 6.0, 1e-3, 1.0 + 0j, -220.0 + 0j)
    a = _backend.integrate_radial(*args)
    b = _ode_py.integrate_radial(*args)
    za = a[0] * np.exp(a[2])
    zb = b[0] * np.exp(b[2])
    assert abs(za - zb) <= 1e-8 * abs(zb)
