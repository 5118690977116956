"""Monodromy of psi'' = (v(z) + lam z^k) psi around an apparent singularity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .kdv import KdvPotential, OperSpec


@dataclass
class MonodromyReport:
    matrix: np.ndarray
    deviation: float  # max-entry norm of M - Id
    det: complex
    steps: int
    amplification: float  # max |M_ab|; deviations below amplification * 1e-12 are noise

    def to_json(self) -> dict:
        return {
            "matrix": [[[z.real, z.imag] for z in row] for row in self.matrix.tolist()],
            "deviation": self.deviation,
            "det": [self.det.real, self.det.imag],
            "steps": self.steps,
            "amplification": self.amplification,
        }


def monodromy_matrix(spec: OperSpec, j: int = 0, radius: float | None = None, lam: complex = 1.0,
                     rtol: float = 1e-12, margin: float = 1.5, backend=None) -> MonodromyReport:
    """Transfer matrix of a fundamental system once around w_j + rho e^(i theta).

    The basis at theta = 0 is (psi, dpsi/dz) = identity.  Any other singular
    point (the origin or another w_i) must lie farther than margin * rho from w_j.
    """
    if spec.m == 0:
        raise ValueError("no finite singular points to encircle (m = 0)")
    if not 0 <= j < spec.m:
        raise ValueError(f"point index {j} out of range for m = {spec.m}")
    center = spec.w[j]
    others = [0j] + [w for i, w in enumerate(spec.w) if i != j]
    nearest = min(abs(center - p) for p in others)
    rho = radius if radius is not None else nearest / (2 * margin)
    if rho <= 0:
        raise ValueError("radius must be positive")
    if nearest <= margin * rho:
        raise ValueError(
            f"contour of radius {rho} around w_{j + 1} passes within {nearest - rho:.3g} "
            "of another singular point"
        )
    pot = KdvPotential(spec)
    kern = backend or _backend
    M, steps = kern.integrate_circle(
        center, float(rho), pot.k, pot.rr1, pot.s1, complex(lam), pot.w, pot.a, rtol=rtol,
    )
    M = np.asarray(M, dtype=complex)
    dev = float(np.max(np.abs(M - np.eye(2))))
    return MonodromyReport(M, dev, complex(np.linalg.det(M)), int(steps), float(np.max(np.abs(M))))
