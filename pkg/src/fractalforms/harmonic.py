"""Harmonic functions on both fractals.

Gasket side: the exact two-parameter-per-boundary-vertex harmonic family,
built by the five-point midpoint extension rule in rational arithmetic.
Carpet side: the discrete energy minimizer with left/right plate boundary
conditions ("good function"), the one-dimensional increasing profile f used
for lower bounds, the digit-restricted sublattice energy used for upper
bounds, and Harnack/Holder ball experiments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .energies import (
    VertexFunction,
    corner_ids_at_level,
    kigami_energy_En,
    sc_pointwise_energy_Dn,
    sc_scaled_energy_an,
)
from .geometry import (
    VertexGraph,
    corner_numerators,
    sc_side_ids,
    vertex_graph,
)
from .kinds import (
    SC_LEVEL_CAP,
    SC_RHO_NUMERIC,
    SG_LEVEL_CAP,
    FractalKind,
)
from .networks import graph_edge_arrays, solve_dirichlet
from .words import Word, as_digits

__all__ = [
    "SgHarmonic",
    "sg_harmonic",
    "triadic_f",
    "half_triadic_f",
    "x_profile_value",
    "x_profile_energy_level1",
    "minimize_x_profile_level1",
    "strip_energy_checks",
    "ScGoodFunction",
    "sc_good_function",
    "HarnackBall",
    "harnack_ball",
    "harnack_ratio",
    "holder_constant",
]


# ---------------------------------------------------------------------------
# gasket harmonic family

def _midpoints(x, y, z):
    # one refinement step: values at the three edge midpoints
    m01 = (2 * x + 2 * y + z) / 5
    m02 = (2 * x + y + 2 * z) / 5
    m12 = (x + 2 * y + 2 * z) / 5
    return m01, m02, m12


@dataclass(frozen=True)
class SgHarmonic:
    """Harmonic function on the gasket with prescribed corner values.

    Values are exact rationals; denominators stay in powers of 5 (times
    whatever the boundary data brings in).
    """

    boundary: tuple

    @classmethod
    def make(cls, x0, x1, x2) -> "SgHarmonic":
        return cls((Fraction(x0), Fraction(x1), Fraction(x2)))

    def boundary_energy(self) -> Fraction:
        a, b, c = self.boundary
        return (a - b) ** 2 + (b - c) ** 2 + (a - c) ** 2

    def corner_triple(self, w) -> tuple:
        """Values at the three corners of cell w, outermost first."""
        t = self.boundary
        for d in as_digits(w):
            x, y, z = t
            m01, m02, m12 = _midpoints(x, y, z)
            if d == 0:
                t = (x, m01, m02)
            elif d == 1:
                t = (m01, y, m12)
            else:
                t = (m02, m12, z)
        return t

    def value_at(self, w) -> Fraction:
        """Value at the vertex addressed by the nonempty word w."""
        digits = as_digits(w)
        if not digits:
            raise ValueError("vertex addresses are nonempty words")
        return self.corner_triple(digits[:-1])[digits[-1]]

    def vertex_function(self, vg: VertexGraph) -> VertexFunction:
        if vg.kind is not FractalKind.SG:
            raise ValueError("gasket harmonic values need a gasket graph")
        n = vg.level
        vals: list = [None] * vg.n_vertices
        ids = corner_ids_at_level(vg, n)

        def fill(triple, depth, base):
            if depth == n:
                i0, i1, i2 = ids[base]
                vals[i0], vals[i1], vals[i2] = triple
                return
            x, y, z = triple
            m01, m02, m12 = _midpoints(x, y, z)
            stride = 3 ** (n - depth - 1)
            fill((x, m01, m02), depth + 1, base)
            fill((m01, y, m12), depth + 1, base + stride)
            fill((m02, m12, z), depth + 1, base + 2 * stride)

        fill(self.boundary, 0, 0)
        return VertexFunction(vg, vals)


def sg_harmonic(
    x0, x1, x2, n: int, graph: Optional[VertexGraph] = None, max_level: int = SG_LEVEL_CAP
) -> VertexFunction:
    """Exact harmonic values on the level-n gasket vertex set."""
    if not 0 <= n <= max_level:
        raise ValueError(f"level {n} outside [0, {max_level}]")
    vg = graph if graph is not None else vertex_graph(FractalKind.SG, n)
    if vg.level != n:
        raise ValueError("graph level does not match n")
    return SgHarmonic.make(x0, x1, x2).vertex_function(vg)


# ---------------------------------------------------------------------------
# the increasing profile f on [0,1]
#
# f fixes 0 and 1 and scales by 2/7, 3/7, 2/7 on the three thirds.  Values at
# half-triadic points follow from f(1/2) = 1/2 and the affine self-similarity
# of f on every triadic interval.

_f_memo: dict = {
    Fraction(0): Fraction(0),
    Fraction(1): Fraction(1),
    Fraction(1, 2): Fraction(1, 2),
}

_F_OFFSET = (Fraction(0), Fraction(2, 7), Fraction(5, 7))
_F_SCALE = (Fraction(2, 7), Fraction(3, 7), Fraction(2, 7))


def _f_value(x: Fraction) -> Fraction:
    got = _f_memo.get(x)
    if got is not None:
        return got
    d = int(3 * x)  # x in (0,1) and x != 1, so d in {0,1,2}
    val = _F_OFFSET[d] + _F_SCALE[d] * _f_value(3 * x - d)
    _f_memo[x] = val
    return val


def _denominator_form(x: Fraction) -> tuple[bool, bool]:
    """(is_triadic, is_half_triadic) for the reduced denominator."""
    den = x.denominator
    halved = den % 2 == 0
    if halved:
        den //= 2
    while den % 3 == 0:
        den //= 3
    return (den == 1 and not halved, den == 1 and halved)


def triadic_f(t) -> Fraction:
    """The profile value f(t) at a triadic rational t = i/3^n in [0,1]."""
    t = Fraction(t)
    if not 0 <= t <= 1:
        raise ValueError(f"{t} outside [0,1]")
    triadic, _ = _denominator_form(t)
    if not triadic:
        raise ValueError(f"{t} is not a triadic rational")
    return _f_value(t)


def half_triadic_f(t) -> Fraction:
    """f at an edge-midpoint abscissa (2j+1)/(2*3^n): the mean of the two
    flanking triadic values, by f(1/2)=1/2 and interval self-similarity."""
    t = Fraction(t)
    if not 0 <= t <= 1:
        raise ValueError(f"{t} outside [0,1]")
    _, half = _denominator_form(t)
    if not half:
        raise ValueError(f"{t} is not half-triadic")
    return _f_value(t)


def x_profile_value(t) -> Fraction:
    """f at any vertex abscissa of a carpet graph (triadic or half-triadic)."""
    t = Fraction(t)
    if not 0 <= t <= 1:
        raise ValueError(f"{t} outside [0,1]")
    triadic, half = _denominator_form(t)
    if not (triadic or half):
        raise ValueError(f"{t} is not a carpet vertex abscissa")
    return _f_value(t)


# ---------------------------------------------------------------------------
# level-1 profile energy and its exact minimizer
#
# For U(x,y) = g(x) with g through (0, a, b, 1) at the quarter points of the
# triadic grid, the level-1 per-cell pair energy collapses to a quadratic in
# (a, b): columns hold 3, 2, 3 cells and each cell contributes its horizontal
# increment squared.

def x_profile_energy_level1(a, b):
    a, b = Fraction(a), Fraction(b)
    return 3 * a ** 2 + 2 * (a - b) ** 2 + 3 * (1 - b) ** 2


def minimize_x_profile_level1() -> tuple[tuple[Fraction, Fraction], Fraction]:
    """Exact stationary point of the level-1 profile energy.

    Solves the 2x2 linear gradient system in rational arithmetic; returns
    ((a, b), energy)."""
    # gradient: 10a - 4b = 0 ; -4a + 10b = 6
    det = Fraction(10 * 10 - (-4) * (-4))
    a = (Fraction(0) * 10 - (-4) * Fraction(6)) / det
    b = (10 * Fraction(6) - Fraction(0) * (-4)) / det
    return (a, b), x_profile_energy_level1(a, b)


# ---------------------------------------------------------------------------
# exact carpet energies of the explicit test functions

CANTOR_DIGITS = (0, 1, 2, 4, 5, 6)  # bottom-row and top-row cells only

_SC_RING_PAIRS = tuple((i, (i + 1) % 8) for i in range(8))


def _ring_x_energy(n: int, digits: Sequence[int], fn) -> Fraction:
    """Sum over words in digits^n of the ring-pair energy of u = fn(x)."""
    from .geometry import _cell_accumulators  # internal but stable

    den = 2 * 3 ** n
    total = Fraction(0)
    fn_memo: dict = {}

    def fx(xn: int) -> Fraction:
        got = fn_memo.get(xn)
        if got is None:
            got = fn(Fraction(xn, den))
            fn_memo[xn] = got
        return got

    for w in itertools.product(digits, repeat=n):
        gx, _ = _cell_accumulators(FractalKind.SC, w)
        ring = [corner_numerators(FractalKind.SC, gx, 0, i)[0] for i in range(8)]
        for i, j in _SC_RING_PAIRS:
            if ring[i] != ring[j]:
                d = fx(ring[i]) - fx(ring[j])
                total += d * d
    return total


def strip_energy_checks(
    n: int, max_level: int = SC_LEVEL_CAP
) -> tuple[Fraction, Fraction]:
    """Two exact level-n carpet energies.

    First: the full per-cell pair energy of U(x,y) = f(x), computed on the
    vertex graph.  Second: the same energy of u(x,y) = x summed only over the
    cells whose digits avoid the two mid-row maps (a Cantor set of rows).
    Expected closed forms: (6/7)^n and (2/3)^n.
    """
    if not 1 <= n <= max_level:
        raise ValueError(f"level {n} outside [1, {max_level}]")
    vg = vertex_graph(FractalKind.SC, n, with_cells=False)
    u = VertexFunction.from_x_fraction(vg, x_profile_value)
    sc_value = sc_pointwise_energy_Dn(u, n)
    cantor_value = _ring_x_energy(n, CANTOR_DIGITS, lambda x: x)
    return sc_value, cantor_value


# ---------------------------------------------------------------------------
# carpet good function

@dataclass(eq=False)
class ScGoodFunction:
    """Discrete minimizer of the level-n pair energy with plate boundary
    conditions: 0 on the left side, 1 on the right."""

    level: int
    fn: VertexFunction
    energy: float
    info: dict = field(repr=False, default_factory=dict)

    @property
    def graph(self) -> VertexGraph:
        return self.fn.graph

    def midline_ids(self) -> np.ndarray:
        vg = self.graph
        return np.nonzero(vg.xn == 3 ** vg.scale)[0]

    def values_json_dict(self) -> dict:
        vg = self.graph
        x, y = vg.float_coords()
        return {
            "level": self.level,
            "energy": self.energy,
            "x": [float(v) for v in x],
            "y": [float(v) for v in y],
            "value": [float(v) for v in self.fn.as_float_array()],
        }


def sc_good_function(
    n: int,
    graph: Optional[VertexGraph] = None,
    max_level: int = SC_LEVEL_CAP,
    **solver_kw,
) -> ScGoodFunction:
    """Solve the left/right plate problem on the level-n carpet graph.

    Conductances are the per-cell pair counts, so the minimized quadratic is
    exactly the level-n pair energy and its minimum is 1/R_n^V.
    """
    if not 1 <= n <= max_level:
        raise ValueError(f"level {n} outside [1, {max_level}]")
    vg = graph if graph is not None else vertex_graph(FractalKind.SC, n, with_cells=False)
    if vg.kind is not FractalKind.SC or vg.level != n:
        raise ValueError("graph does not match the requested level")
    left = sc_side_ids(vg, "left")
    right = sc_side_ids(vg, "right")
    ii, jj, cc = graph_edge_arrays(vg)
    fixed_ids = np.concatenate([left, right])
    fixed_vals = np.concatenate([np.zeros(len(left)), np.ones(len(right))])
    u, info = solve_dirichlet(vg.n_vertices, ii, jj, cc, fixed_ids, fixed_vals, **solver_kw)
    du = u[ii] - u[jj]
    energy = float(np.dot(cc * du, du))
    return ScGoodFunction(level=n, fn=VertexFunction(vg, u), energy=energy, info=info)


# ---------------------------------------------------------------------------
# Harnack ball experiments

@dataclass(eq=False)
class HarnackBall:
    """Ball decomposition of a carpet graph for a Dirichlet problem.

    `boundary_ids` are the ball vertices on the sphere or with a neighbor
    outside the closed ball; `interior_ids` are the remaining ball vertices;
    `inner_ids` are the ball vertices within delta*r of the center.
    All id arrays are sorted, so boundary data indexed by position is
    deterministic.
    """

    graph: VertexGraph
    center: tuple
    r: Fraction
    delta: Fraction
    interior_ids: np.ndarray
    boundary_ids: np.ndarray
    inner_ids: np.ndarray


def _sq_dist_num(vg: VertexGraph, center) -> tuple[np.ndarray, int]:
    """Integer squared distances to the center times a common denominator.

    Returns (num, den2) with dist^2 = num / den2 exactly.  Center coordinates
    must have denominators dividing the vertex grid."""
    cx, cy = Fraction(center[0]), Fraction(center[1])
    full = 2 * 3 ** vg.scale
    cxn = cx * full
    cyn = cy * full
    if cxn.denominator != 1 or cyn.denominator != 1:
        raise ValueError("center must lie on the vertex coordinate grid")
    dx = vg.xn.astype(object) - int(cxn)
    dy = vg.yn.astype(object) - int(cyn)
    return dx * dx + dy * dy, full * full


def harnack_ball(
    n_or_graph, center, r, delta, max_level: int = SC_LEVEL_CAP
) -> HarnackBall:
    if isinstance(n_or_graph, VertexGraph):
        vg = n_or_graph
    else:
        n = int(n_or_graph)
        if not 1 <= n <= max_level:
            raise ValueError(f"level {n} outside [1, {max_level}]")
        vg = vertex_graph(FractalKind.SC, n, with_cells=False)
    r = Fraction(r)
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0,1)")
    if r <= 0:
        raise ValueError("r must be positive")
    num, den2 = _sq_dist_num(vg, center)
    r2 = r * r
    inner2 = r2 * delta * delta
    # exact comparisons: num/den2 <= r2  <=>  num*r2.den <= r2.num*den2
    in_ball = np.array(
        [x * r2.denominator <= r2.numerator * den2 for x in num], dtype=bool
    )
    in_inner = np.array(
        [x * inner2.denominator <= inner2.numerator * den2 for x in num], dtype=bool
    )
    on_sphere = np.array(
        [x * r2.denominator == r2.numerator * den2 for x in num], dtype=bool
    )
    ii, jj = vg.edges[:, 0], vg.edges[:, 1]
    has_outside_neighbor = np.zeros(vg.n_vertices, dtype=bool)
    out_i = in_ball[ii] & ~in_ball[jj]
    out_j = in_ball[jj] & ~in_ball[ii]
    has_outside_neighbor[ii[out_i]] = True
    has_outside_neighbor[jj[out_j]] = True
    boundary_mask = in_ball & (on_sphere | has_outside_neighbor)
    interior_mask = in_ball & ~boundary_mask
    return HarnackBall(
        graph=vg,
        center=(Fraction(center[0]), Fraction(center[1])),
        r=r,
        delta=delta,
        interior_ids=np.nonzero(interior_mask)[0],
        boundary_ids=np.nonzero(boundary_mask)[0],
        inner_ids=np.nonzero(in_inner)[0],
    )


def harnack_solve(ball: HarnackBall, boundary_values, **solver_kw) -> np.ndarray:
    """Potentials on the whole graph (zero off the ball), harmonic on the
    interior for the pair-count conductances, boundary data in id order."""
    vg = ball.graph
    bvals = np.asarray(boundary_values, dtype=float)
    if bvals.shape != (len(ball.boundary_ids),):
        raise ValueError(
            f"expected {len(ball.boundary_ids)} boundary values, got {bvals.shape}"
        )
    if np.any(bvals < 0):
        raise ValueError("boundary values must be nonnegative")
    if not np.any(bvals > 0):
        raise ValueError("boundary values must not be identically zero")
    in_ball = np.zeros(vg.n_vertices, dtype=bool)
    in_ball[ball.interior_ids] = True
    in_ball[ball.boundary_ids] = True
    ii, jj, cc = graph_edge_arrays(vg)
    keep = in_ball[ii] & in_ball[jj]
    u, _ = solve_dirichlet(
        vg.n_vertices,
        ii[keep],
        jj[keep],
        cc[keep],
        ball.boundary_ids,
        bvals,
        **solver_kw,
    )
    return u


def harnack_ratio(
    n, center, r, delta, boundary_values, ball: Optional[HarnackBall] = None, **solver_kw
) -> float:
    """Max/min of the ball-harmonic extension over the shrunken ball.

    Returns inf when the minimum vanishes; raises on an empty shrunken ball.
    """
    if ball is None:
        ball = harnack_ball(n, center, r, delta)
    if len(ball.inner_ids) == 0:
        raise ValueError("no vertices inside the shrunken ball")
    u = harnack_solve(ball, boundary_values, **solver_kw)
    inner = u[ball.inner_ids]
    lo = float(inner.min())
    hi = float(inner.max())
    if lo <= 0.0:
        return float("inf")
    return hi / lo


# ---------------------------------------------------------------------------
# Holder quotient experiments

def holder_constant(
    u: VertexFunction,
    n: int,
    beta: float,
    rho: float = SC_RHO_NUMERIC,
    n_pairs: int = 20000,
    seed: int = 0,
) -> float:
    """Max sampled quotient |u(p)-u(q)|^2 / (E(u) * |p-q|^(beta-alpha)).

    E(u) is the level-n scaled energy for the graph's fractal.  Pairs are all
    graph edges plus uniformly sampled vertex pairs."""
    vg = u.graph
    kind = vg.kind
    if kind is FractalKind.SG:
        energy = float(kigami_energy_En(u, n))
    else:
        energy = sc_scaled_energy_an(u, n, rho)
    if not energy > 0.0:
        raise ValueError("scaled energy must be positive")
    vals = u.as_float_array()
    ii = vg.edges[:, 0].copy()
    jj = vg.edges[:, 1].copy()
    if n_pairs > 0:
        rng = np.random.default_rng(seed)
        ri = rng.integers(0, vg.n_vertices, size=n_pairs)
        rj = rng.integers(0, vg.n_vertices, size=n_pairs)
        ok = ri != rj
        ii = np.concatenate([ii, ri[ok]])
        jj = np.concatenate([jj, rj[ok]])
    dx = vg.xn[ii].astype(float) - vg.xn[jj].astype(float)
    dy = vg.yn[ii].astype(float) - vg.yn[jj].astype(float)
    if kind is FractalKind.SG:
        sq = (dx * dx + 3.0 * dy * dy) / 4.0 ** vg.scale
    else:
        sq = (dx * dx + dy * dy) / (4.0 * 9.0 ** vg.scale)
    du = vals[ii] - vals[jj]
    expo = (beta - kind.alpha) / 2.0
    quot = du * du / (energy * sq ** expo)
    return float(quot.max())
