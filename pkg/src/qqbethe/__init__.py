"""Exact QQ-tilde verification and Bethe/oper numerics."""

from .liedata import AlgebraData, dual_alpha, fold_twisted, load_algebra

__version__ = "0.1.0"

__all__ = ["AlgebraData", "load_algebra", "fold_twisted", "dual_alpha", "__version__"]
