"""Numerics for Dirichlet forms on gasket and carpet approximation graphs."""

from .kinds import FractalKind

__all__ = ["FractalKind"]
__version__ = "0.1.0"
