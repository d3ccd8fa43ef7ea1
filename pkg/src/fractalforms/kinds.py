"""Fractal families handled by this package.

Two self-similar sets are supported: the triangular gasket generated by 3
midpoint contractions of ratio 1/2, and the square carpet generated by the 8
boundary contractions of ratio 1/3.  All geometry downstream is exact integer
arithmetic; this module owns the per-family constants.
"""
from __future__ import annotations

import math
from enum import Enum


class FractalKind(str, Enum):
    SG = "sg"
    SC = "sc"

    @property
    def n_maps(self) -> int:
        return 3 if self is FractalKind.SG else 8

    @property
    def base(self) -> int:
        # contraction denominator: cells at level n have side base**-n
        return 2 if self is FractalKind.SG else 3

    @property
    def alpha(self) -> float:
        """Hausdorff dimension log(n_maps)/log(base)."""
        return math.log(self.n_maps) / math.log(self.base)

    @property
    def boundary_size(self) -> int:
        # points of V_0 = images that glue cells together
        return 3 if self is FractalKind.SG else 8

    def __str__(self) -> str:  # keeps CLI/report output tidy
        return self.value


# Gasket corner numerators in units of 2**-1 on the lattice (1, sqrt(3)):
# p0=(0,0), p1=(1,0), p2=(1/2, sqrt(3)/2).
SG_AX = (0, 2, 1)
SG_AY = (0, 0, 1)

# Carpet boundary points in units of 1/2, counterclockwise from the origin:
# corners and edge midpoints of the unit square.  Index i is the digit i.
SC_OX = (0, 1, 2, 2, 2, 1, 0, 0)
SC_OY = (0, 0, 0, 1, 2, 2, 2, 1)

# Critical Besov exponent of the gasket (closed form).
SG_BETA_STAR = math.log(5.0) / math.log(2.0)

# Carpet resistance growth factor: provable window and the numerical value.
SC_RHO_WINDOW = (7.0 / 6.0, 3.0 / 2.0)
SC_RHO_NUMERIC = 1.25148

# Default level guards: beyond these the graphs stop fitting desk budgets.
SG_LEVEL_CAP = 12
SC_LEVEL_CAP = 7


def sc_beta_star(rho: float) -> float:
    """Critical exponent log(8*rho)/log(3) for a given resistance factor."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return math.log(8.0 * rho) / math.log(3.0)
