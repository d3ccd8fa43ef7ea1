"""Random walk on the rooted ternary tree augmented by same-level edges.

Vertices are all words up to a working depth; the conductance of an edge at
level n decays like (3*lam)^(-n), which tunes the walk's per-level return
ratio to lam.  Finite truncations bracket the infinite-graph quantities: a
closure that grounds the working sphere overstates escape, and a closure
that replaces everything below the sphere by exact per-vertex tree-tail
resistors carries no horizontal edges down there and so reproduces the
infinite tree-tail exactly.  Monte Carlo runs cross-check the linear
algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .geometry import cell_graph
from .kinds import FractalKind
from .networks import resistance_from_arrays, solve_dirichlet
from .words import Word, as_digits

__all__ = [
    "WalkParams",
    "TreeGraph",
    "tree_graph",
    "conductance",
    "vertical_conductance",
    "horizontal_conductance",
    "WalkTables",
    "build_tables",
    "hitting_prob_F",
    "green_oo",
    "boundary_hit_distribution",
    "gromov_product",
    "rho_a",
    "martin_kernel_check",
    "ctrw_lifetime",
    "ctrw_lifetime_closed_form",
    "ctrw_truncation_bias",
    "detailed_balance_residual",
    "escape_depth_profile",
]


@dataclass(frozen=True)
class WalkParams:
    """Walk and simulation parameters.

    `lam` is the per-level return ratio; C1/C2 weight the two kinds of
    same-level adjacency; `c` (needed only by the continuous-time lifetime)
    must stay below lam.
    """

    lam: float
    C1: float = 1.0
    C2: float = 1.0
    c: Optional[float] = None
    seed: int = 0
    samples: int = 100_000
    depth_cut: int = 12
    step_cap: int = 200_000
    workers: int = 4

    def __post_init__(self) -> None:
        if not 0.0 < self.lam < 1.0:
            raise ValueError("lam must be in (0,1)")
        if self.C1 <= 0 or self.C2 <= 0:
            raise ValueError("C1 and C2 must be positive")
        if self.c is not None and not 0.0 < self.c < self.lam:
            raise ValueError("c must be in (0, lam)")
        if self.depth_cut < 2:
            raise ValueError("depth_cut must be >= 2")
        if self.samples < 1 or self.step_cap < 1 or self.workers < 1:
            raise ValueError("samples, step_cap, workers must be positive")

    def require_c(self) -> float:
        if self.c is None:
            raise ValueError("this operation needs the c parameter")
        return self.c


# ---------------------------------------------------------------------------
# graph structure

def _level_offset(n: int) -> int:
    # number of words shorter than n
    return (3 ** n - 1) // 2


def _word_rank(digits: Sequence[int]) -> int:
    r = 0
    for d in digits:
        r = 3 * r + d
    return r


@lru_cache(maxsize=16)
def _level_horizontals(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(i, j, is_second_type) among lexicographic ranks at level n."""
    cg = cell_graph(FractalKind.SG, n)
    ii = np.array([e[0] for e in cg.edges], dtype=np.int64)
    jj = np.array([e[1] for e in cg.edges], dtype=np.int64)
    tt = np.array([t == "II" for t in cg.edge_types], dtype=bool)
    return ii, jj, tt


@dataclass(eq=False)
class TreeGraph:
    """All words of levels 0..depth with vertical and same-level edges."""

    depth: int

    @property
    def n_vertices(self) -> int:
        return _level_offset(self.depth + 1)

    def id_of(self, w) -> int:
        digits = as_digits(w)
        if len(digits) > self.depth:
            raise ValueError(f"word deeper than the working depth {self.depth}")
        return _level_offset(len(digits)) + _word_rank(digits)

    def word_of(self, i: int) -> Word:
        if not 0 <= i < self.n_vertices:
            raise ValueError("vertex id out of range")
        n = 0
        while _level_offset(n + 1) <= i:
            n += 1
        r = i - _level_offset(n)
        digits = []
        for _ in range(n):
            digits.append(r % 3)
            r //= 3
        return Word(tuple(reversed(digits)))

    def level_of(self, i: int) -> int:
        n = 0
        while _level_offset(n + 1) <= i:
            n += 1
        return n

    def sphere_ids(self, n: int) -> np.ndarray:
        return np.arange(_level_offset(n), _level_offset(n + 1), dtype=np.int64)


@lru_cache(maxsize=6)
def tree_graph(depth: int) -> TreeGraph:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    return TreeGraph(depth)


# ---------------------------------------------------------------------------
# conductances

def vertical_conductance(params: WalkParams, n: int) -> float:
    """Edge weight between a level-n word and its children."""
    if n < 0:
        raise ValueError("level must be >= 0")
    return (3.0 * params.lam) ** (-n)

def horizontal_conductance(params: WalkParams, n: int, edge_type: str) -> float:
    if n < 1:
        raise ValueError("same-level edges start at level 1")
    scale = (3.0 * params.lam) ** (-n)
    if edge_type == "I":
        return params.C1 * scale
    if edge_type == "II":
        return params.C2 * scale
    raise ValueError(f"unknown edge type {edge_type!r}")


def _horizontal_type(x_digits, y_digits) -> Optional[str]:
    n = len(x_digits)
    if n != len(y_digits) or n < 1:
        return None
    ii, jj, tt = _level_horizontals(n)
    rx, ry = _word_rank(x_digits), _word_rank(y_digits)
    a, b = min(rx, ry), max(rx, ry)
    hit = np.nonzero((ii == a) & (jj == b))[0]
    if len(hit) == 0:
        return None
    return "II" if tt[hit[0]] else "I"


def conductance(params: WalkParams, x, y) -> float:
    """Conductance of the edge between words x and y; errors off-edge."""
    xd, yd = as_digits(x), as_digits(y)
    if len(xd) > len(yd):
        xd, yd = yd, xd
    if len(yd) == len(xd) + 1 and yd[: len(xd)] == xd:
        return vertical_conductance(params, len(xd))
    t = _horizontal_type(xd, yd)
    if t is not None:
        return horizontal_conductance(params, len(xd), t)
    raise ValueError("not an edge of the walk graph")


# ---------------------------------------------------------------------------
# padded transition tables for vectorized simulation

TAIL = -2  # pseudo-neighbor: a step into the untruncated subtree below


@dataclass(eq=False)
class WalkTables:
    tree: TreeGraph
    params: WalkParams
    nbr: np.ndarray      # (V, W) int32, -1 padded, TAIL for tail steps
    cum: np.ndarray      # (V, W) float64 cumulative transition probabilities
    pi: np.ndarray       # (V,) total incident conductance
    level: np.ndarray    # (V,) int16

    def step(self, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(states.shape[0])
        cols = (self.cum[states] < u[:, None]).sum(axis=1)
        return self.nbr[states, cols].astype(np.int64)


def _edge_arrays(params: WalkParams, depth: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All edges of the depth-truncated graph with conductances."""
    ii_all, jj_all, cc_all = [], [], []
    # vertical: level n parents to level n+1 children
    for n in range(depth):
        parents = np.repeat(np.arange(3 ** n, dtype=np.int64), 3)
        children = np.arange(3 ** (n + 1), dtype=np.int64)
        ii_all.append(_level_offset(n) + parents)
        jj_all.append(_level_offset(n + 1) + children)
        cc_all.append(np.full(3 ** (n + 1), vertical_conductance(params, n)))
    # horizontal per level
    for n in range(1, depth + 1):
        hi, hj, ht = _level_horizontals(n)
        base = _level_offset(n)
        w = np.where(
            ht,
            horizontal_conductance(params, n, "II"),
            horizontal_conductance(params, n, "I"),
        )
        ii_all.append(base + hi)
        jj_all.append(base + hj)
        cc_all.append(w)
    return np.concatenate(ii_all), np.concatenate(jj_all), np.concatenate(cc_all)


@lru_cache(maxsize=8)
def build_tables(params: WalkParams, depth: int, tail: bool = False) -> WalkTables:
    """Padded neighbor tables for the ball of the given depth.

    With tail=True the working-sphere rows carry one pseudo-entry of weight
    3*(3 lam)^(-depth) standing for the three subtree edges below; a sampled
    TAIL step must then be resolved by the caller (return with probability
    lam, escape otherwise), which reproduces the bare-subtree excursion law
    exactly.
    """
    tg = tree_graph(depth)
    V = tg.n_vertices
    ii, jj, cc = _edge_arrays(params, depth)
    ends = np.concatenate([ii, jj])
    oths = np.concatenate([jj, ii])
    ws = np.concatenate([cc, cc])
    if tail:
        sphere = tg.sphere_ids(depth)
        ends = np.concatenate([ends, sphere])
        oths = np.concatenate([oths, np.full(len(sphere), TAIL, dtype=np.int64)])
        ws = np.concatenate([ws, np.full(len(sphere), 3.0 * vertical_conductance(params, depth))])
    order = np.argsort(ends, kind="stable")
    ends_s, oths_s, ws_s = ends[order], oths[order], ws[order]
    deg = np.bincount(ends, minlength=V)
    W = int(deg.max())
    starts = np.concatenate([[0], np.cumsum(deg)[:-1]])
    col = np.arange(len(ends_s)) - starts[ends_s]
    nbr = np.full((V, W), -1, dtype=np.int32)
    wts = np.zeros((V, W), dtype=np.float64)
    nbr[ends_s, col] = oths_s
    wts[ends_s, col] = ws_s
    pi = wts.sum(axis=1)
    cum = np.cumsum(wts, axis=1) / pi[:, None]
    cum[:, -1] = 1.0
    level = np.zeros(V, dtype=np.int16)
    for n in range(depth + 1):
        level[_level_offset(n) : _level_offset(n + 1)] = n
    return WalkTables(tree=tg, params=params, nbr=nbr, cum=cum, pi=pi, level=level)


# ---------------------------------------------------------------------------
# exact truncation closures
#
# Both closures act on the ball of radius depth_cut.  "ground" grounds the
# working sphere itself; "tail" adds one ground node wired to each sphere
# vertex through the exact resistance of its own infinite subtree,
# (3 lam)^D / (3 (1 - lam)).

def _closure(params: WalkParams, depth: int, mode: str):
    tg = tree_graph(depth)
    ii, jj, cc = _edge_arrays(params, depth)
    sphere = tg.sphere_ids(depth)
    if mode == "ground":
        return tg.n_vertices, ii, jj, cc, sphere
    if mode == "tail":
        ground = tg.n_vertices
        tail_conductance = 3.0 * (1.0 - params.lam) / (3.0 * params.lam) ** depth
        ii = np.concatenate([ii, sphere])
        jj = np.concatenate([jj, np.full(len(sphere), ground, dtype=np.int64)])
        cc = np.concatenate([cc, np.full(len(sphere), tail_conductance)])
        return ground + 1, ii, jj, cc, np.array([ground], dtype=np.int64)
    raise ValueError(f"unknown closure {mode!r}")


def _solver_allowance(residual: float) -> float:
    # widen bracket ends so linear-solver noise cannot flip a containment
    # that holds in exact arithmetic; negligible next to the truncation gap
    return 1e-9 + 1e3 * residual


@lru_cache(maxsize=8)
def _hitting_potentials(
    params: WalkParams, depth_cut: int
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """(lower, upper) potential vectors with their solver allowances; the
    value at id(x) estimates the chance of reaching the root from x before
    escaping."""
    out = []
    pads = []
    for mode in ("ground", "tail"):
        n, ii, jj, cc, ground = _closure(params, depth_cut, mode)
        fixed = np.concatenate([[0], ground])
        vals = np.concatenate([[1.0], np.zeros(len(ground))])
        v, info = solve_dirichlet(n, ii, jj, cc, fixed, vals)
        out.append(v)
        pads.append(_solver_allowance(info["residual"]))
    return out[0], out[1], pads[0], pads[1]


def hitting_prob_F(x, params: WalkParams, depth_cut: Optional[int] = None) -> tuple[float, float]:
    """Bracket for the probability of ever reaching the root from word x.

    The grounded-sphere closure is the lower end, the tree-tail closure the
    upper end; the target closed form lam^|x| lies in between.  Ends are
    widened by the solver allowance of their own solves.
    """
    depth_cut = params.depth_cut if depth_cut is None else depth_cut
    xd = as_digits(x)
    if len(xd) > depth_cut - 1:
        raise ValueError("x must sit strictly inside the working ball")
    if len(xd) == 0:
        return 1.0, 1.0
    lo_v, hi_v, lo_pad, hi_pad = _hitting_potentials(params, depth_cut)
    i = tree_graph(depth_cut).id_of(xd)
    lo, hi = float(lo_v[i]) - lo_pad, float(hi_v[i]) + hi_pad
    return min(lo, hi), max(lo, hi)


def _green_exact(params: WalkParams, depth_cut: int) -> tuple[float, float]:
    out = []
    for mode in ("ground", "tail"):
        n, ii, jj, cc, ground = _closure(params, depth_cut, mode)
        res = resistance_from_arrays(n, ii, jj, cc, np.array([0]), ground)
        pad = _solver_allowance(res.residual)
        out.append(3.0 * res.resistance + (pad if mode == "tail" else -pad))
    lo, hi = out
    return min(lo, hi), max(lo, hi)


# ---------------------------------------------------------------------------
# Monte Carlo engines (counter-based per-worker streams)

def _worker_rngs(params: WalkParams) -> list[np.random.Generator]:
    return [
        np.random.Generator(np.random.Philox(key=[params.seed, w]))
        for w in range(params.workers)
    ]


def _split(total: int, workers: int) -> list[int]:
    base, extra = divmod(total, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def _resolve_tail(
    nxt: np.ndarray, cur: np.ndarray, rng: np.random.Generator, lam: float
) -> tuple[np.ndarray, np.ndarray]:
    """Replace TAIL pseudo-steps by their exact outcome.

    A step into the bare subtree returns to the very vertex it left with
    probability lam and escapes for good otherwise; on return the walk sits
    at that vertex again.  Returns (next states, escaped mask).
    """
    tail_mask = nxt == TAIL
    escaped = np.zeros(len(nxt), dtype=bool)
    if tail_mask.any():
        back = rng.random(int(tail_mask.sum())) < lam
        t_idx = np.nonzero(tail_mask)[0]
        nxt = nxt.copy()
        nxt[t_idx] = cur[t_idx]
        escaped[t_idx[~back]] = True
    return nxt, escaped


def green_oo(
    params: WalkParams, mode: str = "exact", depth_cut: Optional[int] = None
) -> dict:
    """Expected visits to the root, target 1/(1 - lam).

    exact mode: closure bracket {lower, upper}; mc mode: path average with
    standard error.  MC paths live on the working ball with tail excursions
    resolved exactly, so the estimator is unbiased for the infinite graph.
    """
    depth_cut = params.depth_cut if depth_cut is None else depth_cut
    if mode == "exact":
        lo, hi = _green_exact(params, depth_cut)
        return {"lower": lo, "upper": hi}
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    tables = build_tables(params, depth_cut, tail=True)
    counts = []
    for rng, n_paths in zip(_worker_rngs(params), _split(params.samples, params.workers)):
        if n_paths == 0:
            continue
        states = np.zeros(n_paths, dtype=np.int64)
        visits = np.ones(n_paths, dtype=np.int64)  # start counts as a visit
        active = np.ones(n_paths, dtype=bool)
        for _ in range(params.step_cap):
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            nxt = tables.step(states[idx], rng)
            nxt, escaped = _resolve_tail(nxt, states[idx], rng, params.lam)
            states[idx] = nxt
            visits[idx] += nxt == 0
            active[idx[escaped]] = False
        counts.append(visits)
    allc = np.concatenate(counts).astype(float)
    return {
        "mean": float(allc.mean()),
        "stderr": float(allc.std(ddof=1) / math.sqrt(len(allc))),
        "paths": len(allc),
    }


def boundary_hit_distribution(
    params: WalkParams,
    m: int,
    samples: Optional[int] = None,
    depth_cut: int = 10,
) -> dict:
    """Empirical distribution of the level-m prefix of the first word reached
    at the working depth (the finite-budget proxy for the limit word)."""
    if m < 1 or m >= depth_cut:
        raise ValueError("need 1 <= m < depth_cut")
    samples = params.samples if samples is None else samples
    if samples < 1:
        raise ValueError("samples must be >= 1")
    tables = build_tables(params, depth_cut)
    tg = tables.tree
    counts = np.zeros(3 ** m, dtype=np.int64)
    overflowed = 0
    for rng, n_paths in zip(_worker_rngs(params), _split(samples, params.workers)):
        if n_paths == 0:
            continue
        states = np.zeros(n_paths, dtype=np.int64)
        active = np.ones(n_paths, dtype=bool)
        for _ in range(params.step_cap):
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            nxt = tables.step(states[idx], rng)
            states[idx] = nxt
            arrived = tables.level[nxt] >= depth_cut
            hit_ids = nxt[arrived]
            if len(hit_ids):
                # level-m prefix rank: strip depth_cut - m trailing digits
                pref = (hit_ids - _level_offset(depth_cut)) // 3 ** (depth_cut - m)
                np.add.at(counts, pref, 1)
            active[idx[arrived]] = False
        overflowed += int(active.sum())
    used = int(counts.sum())
    freqs = counts / used if used else counts.astype(float)
    return {
        "m": m,
        "counts": counts,
        "freqs": freqs,
        "samples_used": used,
        "overflowed": overflowed,
    }


# ---------------------------------------------------------------------------
# hyperbolic quantities

def _graph_distance(x_digits, y_digits) -> int:
    """BFS distance in the full edge set.

    Shortest paths never dip below the deeper endpoint's level: adjacent
    cells have adjacent (or equal) parents, so any excursion below can be
    replaced by a shorter same-level hop chain.  The search therefore runs
    on the ball of that depth.
    """
    L = max(len(x_digits), len(y_digits))
    tg = tree_graph(max(L, 1))
    # adjacency on demand: parent, children, same-level
    level_adj: dict[int, dict[int, list[int]]] = {}

    def neighbors(i: int) -> list[int]:
        n = tg.level_of(i)
        out = []
        r = i - _level_offset(n)
        if n > 0:
            out.append(_level_offset(n - 1) + r // 3)
        if n < tg.depth:
            off = _level_offset(n + 1)
            out.extend(off + 3 * r + d for d in range(3))
        if n >= 1:
            adj = level_adj.get(n)
            if adj is None:
                ii, jj, _ = _level_horizontals(n)
                adj = {}
                for a, b in zip(ii.tolist(), jj.tolist()):
                    adj.setdefault(a, []).append(b)
                    adj.setdefault(b, []).append(a)
                level_adj[n] = adj
            base = _level_offset(n)
            out.extend(base + b for b in adj.get(r, ()))
        return out

    start = tg.id_of(x_digits)
    goal = tg.id_of(y_digits)
    if start == goal:
        return 0
    seen = {start: 0}
    frontier = [start]
    while frontier:
        nxt_frontier = []
        for i in frontier:
            d = seen[i]
            for j in neighbors(i):
                if j not in seen:
                    if j == goal:
                        return d + 1
                    seen[j] = d + 1
                    nxt_frontier.append(j)
        frontier = nxt_frontier
    raise RuntimeError("graph is connected; unreachable")


def gromov_product(x, y) -> Fraction:
    """(|x| + |y| - d(x,y)) / 2 with the graph metric."""
    xd, yd = as_digits(x), as_digits(y)
    d = _graph_distance(xd, yd)
    return Fraction(len(xd) + len(yd) - d, 2)


def rho_a(x, y, a: float) -> float:
    """exp(-a * gromov_product); zero on the diagonal."""
    if a <= 0:
        raise ValueError("a must be positive")
    xd, yd = as_digits(x), as_digits(y)
    if xd == yd:
        return 0.0
    return math.exp(-a * float(gromov_product(xd, yd)))


def martin_kernel_check(
    params: WalkParams,
    xs: Sequence,
    xis_as_deep_words: Sequence,
    depth_cut: Optional[int] = None,
) -> dict:
    """Spread of K(x, xi) / (lam^|x| (3/lam)^(x^xi)) over the given pairs.

    K is estimated from the tree-tail closure: one potential solve per xi
    with the root as reference.  The comparison target is an asymptotic
    equivalence, so the statistic to watch is the ratio spread staying inside
    a fixed bracket.
    """
    depth_cut = params.depth_cut if depth_cut is None else depth_cut
    lam = params.lam
    xis = [as_digits(w) for w in xis_as_deep_words]
    xs = [as_digits(w) for w in xs]
    need = max((len(w) for w in xis), default=0)
    if need > depth_cut - 2:
        raise ValueError("depth_cut too small for the deep words")
    n, ii, jj, cc, ground = _closure(params, depth_cut, "tail")
    tg = tree_graph(depth_cut)
    rows = []
    for xi in xis:
        xi_id = tg.id_of(xi)
        fixed = np.concatenate([[xi_id], ground])
        vals = np.concatenate([[1.0], np.zeros(len(ground))])
        v, _ = solve_dirichlet(n, ii, jj, cc, fixed, vals)
        if v[0] <= 0:
            raise RuntimeError("root potential vanished; depth too small")
        for x in xs:
            K = float(v[tg.id_of(x)] / v[0])
            gp = float(gromov_product(x, xi))
            target = lam ** len(x) * (3.0 / lam) ** gp
            rows.append(
                {
                    "x": "".join(map(str, x)),
                    "xi": "".join(map(str, xi)),
                    "K": K,
                    "target": target,
                    "ratio": K / target,
                }
            )
    ratios = np.array([r["ratio"] for r in rows])
    return {
        "rows": rows,
        "ratio_min": float(ratios.min()),
        "ratio_max": float(ratios.max()),
        "spread": float(ratios.max() / ratios.min()),
    }


# ---------------------------------------------------------------------------
# continuous-time lifetime

def ctrw_lifetime_closed_form(params: WalkParams) -> float:
    c = params.require_c()
    return 1.0 / (3.0 * (1.0 - params.lam) * (1.0 - c))


def ctrw_truncation_bias(params: WalkParams, depth: int) -> float:
    """Upper bound on the expected lifetime beyond the working depth."""
    c = params.require_c()
    return c ** (depth + 1) / (3.0 * (1.0 - params.lam) * (1.0 - c))


def ctrw_lifetime(
    params: WalkParams, samples: Optional[int] = None, depth_cut: Optional[int] = None
) -> tuple[float, float]:
    """Mean and standard error of the simulated total holding time.

    Tail excursions are resolved exactly, so the only systematic error is
    the holding time the walk would have spent below the working depth,
    bounded by ctrw_truncation_bias and far below the standard error at the
    default depth.
    """
    c = params.require_c()
    depth_cut = params.depth_cut if depth_cut is None else depth_cut
    samples = params.samples if samples is None else samples
    tables = build_tables(params, depth_cut, tail=True)
    inv_rate = np.empty(tables.pi.shape)
    lam3 = 3.0 * params.lam
    for n in range(depth_cut + 1):
        sl = slice(_level_offset(n), _level_offset(n + 1))
        inv_rate[sl] = (c / lam3) ** n / tables.pi[sl]
    totals = []
    for rng, n_paths in zip(_worker_rngs(params), _split(samples, params.workers)):
        if n_paths == 0:
            continue
        states = np.zeros(n_paths, dtype=np.int64)
        t = np.zeros(n_paths)
        active = np.ones(n_paths, dtype=bool)
        for _ in range(params.step_cap):
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            cur = states[idx]
            t[idx] += rng.exponential(inv_rate[cur])
            nxt = tables.step(cur, rng)
            nxt, escaped = _resolve_tail(nxt, cur, rng, params.lam)
            states[idx] = nxt
            active[idx[escaped]] = False
        totals.append(t)
    allt = np.concatenate(totals)
    return float(allt.mean()), float(allt.std(ddof=1) / math.sqrt(len(allt)))


# ---------------------------------------------------------------------------
# structural checks

def detailed_balance_residual(params: WalkParams, depth: int = 4) -> float:
    """Max |pi(x)P(x,y) - pi(y)P(y,x)| over the truncated graph's edges."""
    tables = build_tables(params, depth)
    prob = np.diff(np.concatenate([np.zeros((tables.cum.shape[0], 1)), tables.cum], axis=1), axis=1)
    worst = 0.0
    V, W = tables.nbr.shape
    for i in range(V):
        for k in range(W):
            j = int(tables.nbr[i, k])
            if j < 0 or j < i:
                continue
            flow_ij = tables.pi[i] * prob[i, k]
            back = np.nonzero(tables.nbr[j] == i)[0]
            flow_ji = tables.pi[j] * prob[j, back[0]]
            worst = max(worst, abs(flow_ij - flow_ji))
    return worst


def escape_depth_profile(
    params: WalkParams, step_budgets: Sequence[int], samples: int = 2000
) -> list[tuple[int, float]]:
    """Mean maximal level reached within each step budget (transience proxy)."""
    depth = params.depth_cut
    tables = build_tables(params, depth)
    out = []
    rng = np.random.Generator(np.random.Philox(key=[params.seed, 977]))
    for budget in step_budgets:
        states = np.zeros(samples, dtype=np.int64)
        deepest = np.zeros(samples, dtype=np.int64)
        for _ in range(budget):
            live = tables.level[states] < depth
            if not live.any():
                break
            idx = np.nonzero(live)[0]
            states[idx] = tables.step(states[idx], rng)
            deepest[idx] = np.maximum(deepest[idx], tables.level[states[idx]])
        out.append((int(budget), float(deepest.mean())))
    return out
