"""Resistor-network reduction and effective resistance.

The solver contract is shared by every consumer in the package: dense direct
solve below 10^4 free nodes, diagonally preconditioned conjugate gradients
above, residual tolerance 1e-12, iteration cap 50*sqrt(n).  Triangle-star
substitutions, node shorting, and node cutting are exact on rational inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import (
    VertexGraph,
    cell_graph,
    sc_side_ids,
    sg_corner_ids,
    vertex_graph,
)
from .kinds import FractalKind, sc_beta_star

DENSE_LIMIT = 10_000
CG_TOL = 1e-12
CG_MAXITER_FACTOR = 50


class SolverError(RuntimeError):
    """Linear solve failed to reach the requested residual."""


# ---------------------------------------------------------------------------
# exact 3-terminal transforms

def delta_to_wye(r12, r23, r31):
    """Triangle resistances -> star resistances (exact on Fractions)."""
    s = r12 + r23 + r31
    if s == 0:
        raise ZeroDivisionError("degenerate triangle")
    return (r12 * r31 / s, r12 * r23 / s, r23 * r31 / s)


def wye_to_delta(r1, r2, r3):
    """Star resistances -> triangle resistances (inverse of delta_to_wye)."""
    p = r1 * r2 + r2 * r3 + r3 * r1
    if r1 == 0 or r2 == 0 or r3 == 0:
        raise ZeroDivisionError("star arm with zero resistance")
    return (p / r3, p / r1, p / r2)


# ---------------------------------------------------------------------------
# small editable networks

@dataclass(eq=False)
class WeightedNetwork:
    """Multigraph of conductances keyed by unordered node pairs."""

    conductances: dict[tuple[Hashable, Hashable], object] = field(
        default_factory=dict
    )

    @staticmethod
    def _key(a, b):
        if a == b:
            raise ValueError("self-loop")
        return (a, b) if repr(a) <= repr(b) else (b, a)

    def add_edge(self, a, b, conductance) -> None:
        if conductance < 0:
            raise ValueError("negative conductance")
        k = self._key(a, b)
        self.conductances[k] = self.conductances.get(k, 0) + conductance

    def nodes(self) -> list:
        seen = []
        got = set()
        for a, b in self.conductances:
            for x in (a, b):
                if x not in got:
                    got.add(x)
                    seen.append(x)
        return seen

    def neighbors(self, v) -> list:
        out = []
        for (a, b), c in self.conductances.items():
            if a == v:
                out.append((b, c))
            elif b == v:
                out.append((a, c))
        return out

    def copy(self) -> "WeightedNetwork":
        return WeightedNetwork(dict(self.conductances))

    def remove_edge(self, a, b) -> None:
        del self.conductances[self._key(a, b)]

    def substitute_delta_with_wye(self, a, b, c, center) -> None:
        """Replace the triangle on (a,b,c) by a star through `center`."""
        cab = self.conductances.get(self._key(a, b))
        cbc = self.conductances.get(self._key(b, c))
        cca = self.conductances.get(self._key(c, a))
        if None in (cab, cbc, cca):
            raise KeyError("triangle edge missing")
        one = Fraction(1) if isinstance(cab, Fraction) else 1.0
        r1, r2, r3 = delta_to_wye(one / cab, one / cbc, one / cca)
        self.remove_edge(a, b)
        self.remove_edge(b, c)
        self.remove_edge(c, a)
        self.add_edge(a, center, one / r1)
        self.add_edge(b, center, one / r2)
        self.add_edge(c, center, one / r3)

    def short_nodes(self, group: Iterable, label) -> None:
        """Merge a node group into one node; parallel edges accumulate."""
        group = set(group)
        old = dict(self.conductances)
        self.conductances.clear()
        for (a, b), c in old.items():
            a2 = label if a in group else a
            b2 = label if b in group else b
            if a2 == b2:
                continue  # interior edge vanishes
            self.add_edge(a2, b2, c)

    def cut_node(self, v, parts: Sequence[Iterable]) -> list:
        """Split v into one copy per part; parts must partition its edges."""
        nbrs = [n for n, _ in self.neighbors(v)]
        flat = [x for part in parts for x in part]
        if sorted(map(repr, flat)) != sorted(map(repr, nbrs)):
            raise ValueError("parts do not partition the incident edges")
        labels = [(v, i) for i in range(len(parts))]
        old = dict(self.conductances)
        for (a, b), c in old.items():
            if v in (a, b):
                other = b if a == v else a
                for part, lab in zip(parts, labels):
                    if other in set(part):
                        self.remove_edge(a, b)
                        self.add_edge(lab, other, c)
                        break
        return labels


# ---------------------------------------------------------------------------
# Dirichlet solver on edge arrays

def _components_from(n: int, ii, jj, seeds) -> np.ndarray:
    """Mark nodes sharing a connected component with any seed."""
    if len(ii) == 0:
        out = np.zeros(n, dtype=bool)
        out[np.asarray(seeds, dtype=np.int64)] = True
        return out
    g = sp.coo_matrix((np.ones(len(ii)), (ii, jj)), shape=(n, n))
    _, labels = sp.csgraph.connected_components(g, directed=False)
    return np.isin(labels, labels[np.asarray(seeds, dtype=np.int64)])


def solve_dirichlet(
    n: int,
    ii: np.ndarray,
    jj: np.ndarray,
    cond: np.ndarray,
    fixed_ids: np.ndarray,
    fixed_vals: np.ndarray,
    tol: float = CG_TOL,
    maxiter_factor: int = CG_MAXITER_FACTOR,
    dense_limit: int = DENSE_LIMIT,
) -> tuple[np.ndarray, dict]:
    """Minimize sum c_e (u_i - u_j)^2 subject to the fixed values.

    Returns potentials for all n nodes (unreached components sit at 0) and an
    info dict with method/residual/iterations.
    """
    ii = np.asarray(ii, dtype=np.int64)
    jj = np.asarray(jj, dtype=np.int64)
    cond = np.asarray(cond, dtype=float)
    fixed_ids = np.asarray(fixed_ids, dtype=np.int64)
    fixed_vals = np.asarray(fixed_vals, dtype=float)

    u = np.zeros(n, dtype=float)
    u[fixed_ids] = fixed_vals
    reached = _components_from(n, ii, jj, fixed_ids)
    isfixed = np.zeros(n, dtype=bool)
    isfixed[fixed_ids] = True
    free_mask = reached & ~isfixed
    free = np.nonzero(free_mask)[0]
    if len(free) == 0:
        return u, {"method": "trivial", "residual": 0.0, "iterations": 0}

    pos = -np.ones(n, dtype=np.int64)
    pos[free] = np.arange(len(free))

    # assemble the free-free Laplacian block and the boundary load
    keep = free_mask[ii] | free_mask[jj]
    ei, ej, ec = ii[keep], jj[keep], cond[keep]
    nf = len(free)
    diag = np.zeros(nf)
    rhs = np.zeros(nf)
    fi = free_mask[ei]
    fj = free_mask[ej]
    np.add.at(diag, pos[ei[fi]], ec[fi])
    np.add.at(diag, pos[ej[fj]], ec[fj])
    both = fi & fj
    rows = pos[ei[both]]
    cols = pos[ej[both]]
    vals = -ec[both]
    bi = fi & ~fj  # free i, fixed j
    np.add.at(rhs, pos[ei[bi]], ec[bi] * u[ej[bi]])
    bj = fj & ~fi
    np.add.at(rhs, pos[ej[bj]], ec[bj] * u[ei[bj]])

    L = sp.coo_matrix(
        (
            np.concatenate([vals, vals, diag]),
            (
                np.concatenate([rows, cols, np.arange(nf)]),
                np.concatenate([cols, rows, np.arange(nf)]),
            ),
        ),
        shape=(nf, nf),
    ).tocsr()

    if nf < dense_limit:
        x = np.linalg.solve(L.toarray(), rhs)
        res = float(np.linalg.norm(L @ x - rhs))
        info = {"method": "dense", "residual": res, "iterations": 0}
    else:
        dinv = 1.0 / L.diagonal()
        M = spla.LinearOperator(L.shape, matvec=lambda v: dinv * v)
        maxiter = int(maxiter_factor * math.sqrt(nf)) + 1
        iters = 0

        def _count(_):
            nonlocal iters
            iters += 1

        x, code = spla.cg(
            L, rhs, M=M, rtol=tol, atol=0.0, maxiter=maxiter, callback=_count
        )
        res = float(np.linalg.norm(L @ x - rhs))
        if code != 0:
            raise SolverError(
                f"cg failed (code {code}) at {nf} unknowns, residual {res:.3e}"
            )
        info = {"method": "cg", "residual": res, "iterations": iters}
    u[free] = x
    return u, info


@dataclass
class ResistanceResult:
    resistance: float
    energy: float
    method: str
    residual: float
    potentials: np.ndarray | None = None

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.resistance)


def resistance_from_arrays(
    n: int,
    ii,
    jj,
    cond,
    A_ids,
    B_ids,
    keep_potentials: bool = False,
    tol: float = CG_TOL,
    maxiter_factor: int = CG_MAXITER_FACTOR,
    dense_limit: int = DENSE_LIMIT,
) -> ResistanceResult:
    """Effective resistance between node sets A (potential 0) and B (1)."""
    ii = np.asarray(ii, dtype=np.int64)
    jj = np.asarray(jj, dtype=np.int64)
    cond = np.asarray(cond, dtype=float)
    A_ids = np.asarray(A_ids, dtype=np.int64)
    B_ids = np.asarray(B_ids, dtype=np.int64)
    if len(A_ids) == 0 or len(B_ids) == 0:
        raise ValueError("terminal set empty")
    if set(map(int, A_ids)) & set(map(int, B_ids)):
        raise ValueError("terminal sets overlap")

    reach_A = _components_from(n, ii, jj, A_ids)
    if not reach_A[B_ids].any():
        return ResistanceResult(math.inf, 0.0, "disconnected", 0.0, None)

    fixed = np.concatenate([A_ids, B_ids])
    vals = np.concatenate([np.zeros(len(A_ids)), np.ones(len(B_ids))])
    u, info = solve_dirichlet(
        n, ii, jj, cond, fixed, vals,
        tol=tol, maxiter_factor=maxiter_factor, dense_limit=dense_limit,
    )
    d = u[ii] - u[jj]
    energy = float(np.sum(cond * d * d))
    if energy <= 0:
        return ResistanceResult(math.inf, energy, info["method"], info["residual"])
    return ResistanceResult(
        1.0 / energy,
        energy,
        info["method"],
        info["residual"],
        u if keep_potentials else None,
    )


def effective_resistance(
    net: WeightedNetwork, A: Iterable, B: Iterable, **kw
) -> ResistanceResult:
    nodes = net.nodes()
    at = {v: i for i, v in enumerate(nodes)}
    m = len(net.conductances)
    ii = np.empty(m, dtype=np.int64)
    jj = np.empty(m, dtype=np.int64)
    cc = np.empty(m, dtype=float)
    for e, ((a, b), c) in enumerate(net.conductances.items()):
        ii[e], jj[e], cc[e] = at[a], at[b], float(c)
    A_ids = np.array([at[v] for v in A], dtype=np.int64)
    B_ids = np.array([at[v] for v in B], dtype=np.int64)
    return resistance_from_arrays(len(nodes), ii, jj, cc, A_ids, B_ids, **kw)


# ---------------------------------------------------------------------------
# fractal-specific resistances

def graph_edge_arrays(vg: VertexGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    e = vg.edges
    return e[:, 0], e[:, 1], e[:, 2].astype(float)


def sg_word_resistance(n: int, **kw) -> ResistanceResult:
    """Resistance between the repeated-digit cells 0^n and 1^n on the
    unit-conductance level-n cell graph (both edge types, weight 1).

    Level 1 is the plain triangle (value 2/3); the value grows by a factor
    approaching 5/3 per level.
    """
    cg = cell_graph(FractalKind.SG, int(n))
    at = {w: i for i, w in enumerate(cg.words)}
    a, b = at[(0,) * n], at[(1,) * n]
    ii = np.fromiter((e[0] for e in cg.edges), dtype=np.int64)
    jj = np.fromiter((e[1] for e in cg.edges), dtype=np.int64)
    cc = np.ones(len(cg.edges))
    return resistance_from_arrays(
        cg.n_cells, ii, jj, cc, np.array([a]), np.array([b]), **kw
    )


def sg_vertex_corner_resistance(vg_or_level, **kw) -> ResistanceResult:
    """Resistance between the two bottom corners of the level-n vertex graph
    with unit conductances (scale-invariant up to the (5/3)^n weight)."""
    vg = (
        vg_or_level
        if isinstance(vg_or_level, VertexGraph)
        else vertex_graph(FractalKind.SG, int(vg_or_level), with_cells=False)
    )
    p0, p1, _ = sg_corner_ids(vg)
    ii, jj, cc = graph_edge_arrays(vg)
    return resistance_from_arrays(
        vg.n_vertices, ii, jj, cc, np.array([p0]), np.array([p1]), **kw
    )


def sc_RnV(vg_or_level, **kw) -> ResistanceResult:
    """Left-to-right resistance of the level-n carpet graph with the
    per-cell pair counting as conductances (1 on free sides, 2 on shared)."""
    vg = (
        vg_or_level
        if isinstance(vg_or_level, VertexGraph)
        else vertex_graph(FractalKind.SC, int(vg_or_level), with_cells=False)
    )
    left = sc_side_ids(vg, "left")
    right = sc_side_ids(vg, "right")
    ii, jj, cc = graph_edge_arrays(vg)
    return resistance_from_arrays(vg.n_vertices, ii, jj, cc, left, right, **kw)


# ---------------------------------------------------------------------------
# geometric-sequence fitting

def fit_log_geometric(ns: Sequence[int], values: Sequence[float]) -> tuple[float, float]:
    """Least-squares fit log v_n = intercept + n*log(ratio); returns
    (ratio, intercept).  Requires positive values and >= 2 points."""
    ns = np.asarray(ns, dtype=float)
    vals = np.asarray(values, dtype=float)
    if len(ns) < 2:
        raise ValueError("need at least two points")
    if (vals <= 0).any():
        raise ValueError("values must be positive")
    A = np.stack([np.ones_like(ns), ns], axis=1)
    sol, *_ = np.linalg.lstsq(A, np.log(vals), rcond=None)
    return float(math.exp(sol[1])), float(sol[0])


@dataclass
class RhoEstimate:
    rho_hat: float
    beta_star_hat: float
    levels: tuple[int, ...]
    ratios: tuple[float, ...]


def rho_estimate(
    levels: Sequence[int], R_values: Sequence[float], fit_from: int = 2
) -> RhoEstimate:
    """Fit the growth factor of the left-right resistances and the implied
    critical exponent log(8*rho)/log(3).  Levels below `fit_from` are shown
    in the ratio list but excluded from the fit."""
    levels = [int(x) for x in levels]
    pairs = sorted(zip(levels, R_values))
    ratios = tuple(
        pairs[i + 1][1] / pairs[i][1]
        for i in range(len(pairs) - 1)
        if pairs[i + 1][0] == pairs[i][0] + 1
    )
    fit_pts = [(n, v) for n, v in pairs if n >= fit_from]
    rho, _ = fit_log_geometric([p[0] for p in fit_pts], [p[1] for p in fit_pts])
    return RhoEstimate(rho, sc_beta_star(rho), tuple(p[0] for p in fit_pts), ratios)
