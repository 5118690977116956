"""Pick the compiled ODE kernels when available; QQBETHE_PURE=1 forces Python."""

from __future__ import annotations

import os

from . import _ode_py

BACKEND = "python"
kernels = _ode_py

if os.environ.get("QQBETHE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ode_kernels as _compiled

        kernels = _compiled
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        pass

integrate_radial = kernels.integrate_radial
integrate_circle = kernels.integrate_circle
