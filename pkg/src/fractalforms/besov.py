"""Besov-type semi-norms, walk-dimension estimation, and jump kernels.

The discrete semi-norm is a weighted sum of per-level graph energies; the
integral form is the singular double integral against the product of the
self-similar measures, estimated by Monte Carlo.  The walk dimension comes
out of the geometric decay rate of the energy sequence.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .energies import (
    VertexFunction,
    cell_averages,
    cellgraph_edge_energy,
    CellFunction,
    restrict_to_level,
    sc_pointwise_energy_Dn,
    sg_graph_energy_An,
    sg_pointwise_energy_Bn,
)
from .geometry import cached_vertex_graph
from .harmonic import ScGoodFunction, SgHarmonic
from .kinds import (
    SC_OX,
    SC_OY,
    SC_RHO_NUMERIC,
    SG_AX,
    SG_AY,
    SG_BETA_STAR,
    FractalKind,
    sc_beta_star,
)
from .networks import fit_log_geometric

__all__ = [
    "BesovForm",
    "BesovParams",
    "besov_partial_terms",
    "besov_partial_sum",
    "classify_tail",
    "besov_double_integral_mc",
    "sg_monotone_limit",
    "walkdim_estimate",
    "interval_trace_check",
    "JumpKernelParams",
    "jump_kernel_Ci",
    "discounted_monotone_value",
]

MC_DEPTH_DEFAULT = {FractalKind.SG: 12, FractalKind.SC: 8}


class BesovForm(Enum):
    POINTWISE = "pointwise"
    CELLGRAPH = "cellgraph"


@dataclass(frozen=True)
class BesovParams:
    beta: float
    N: int
    kind: FractalKind
    form: BesovForm = BesovForm.POINTWISE

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.N < 1:
            raise ValueError("truncation level must be >= 1")


def besov_weight(kind: FractalKind, beta: float, n: int) -> float:
    """base^((beta-alpha)n): 2^(beta n)/3^n on the gasket, 3^(beta n)/8^n on
    the carpet."""
    if kind is FractalKind.SG:
        return 2.0 ** (beta * n) / 3.0 ** n
    return 3.0 ** (beta * n) / 8.0 ** n


def _as_vertex_function(u, kind: FractalKind, N: int) -> VertexFunction:
    if isinstance(u, SgHarmonic):
        if kind is not FractalKind.SG:
            raise ValueError("harmonic-family input is gasket data")
        return u.vertex_function(cached_vertex_graph(kind, N))
    if isinstance(u, ScGoodFunction):
        if kind is not FractalKind.SC:
            raise ValueError("good-function input is carpet data")
        if u.level < N:
            raise ValueError(f"good function level {u.level} < N={N}")
        return u.fn
    if isinstance(u, VertexFunction):
        if u.graph.kind is not kind or u.graph.level < N:
            raise ValueError("vertex data does not cover the requested levels")
        return u
    if callable(u):
        vg = cached_vertex_graph(kind, N)
        x, y = vg.float_coords()
        return VertexFunction(vg, np.array([u(px, py) for px, py in zip(x, y)]))
    raise TypeError(f"cannot evaluate {type(u).__name__} on the vertex sets")


def _level_energy(u_n: VertexFunction, n: int, form: BesovForm):
    kind = u_n.graph.kind
    if form is BesovForm.POINTWISE:
        if kind is FractalKind.SG:
            return sg_pointwise_energy_Bn(u_n, n)
        return sc_pointwise_energy_Dn(u_n, n)
    if kind is FractalKind.SG:
        return sg_graph_energy_An(u_n, n)
    return cellgraph_edge_energy(
        CellFunction(kind, n, np.asarray(cell_averages(u_n, n).values, dtype=float))
    )


def besov_partial_terms(u, params: BesovParams) -> list[float]:
    """Per-level weighted energies, n = 1..N."""
    uf = _as_vertex_function(u, params.kind, params.N)
    terms = []
    for n in range(1, params.N + 1):
        if n == uf.graph.level:
            u_n = uf
        else:
            u_n = restrict_to_level(uf, cached_vertex_graph(params.kind, n))
        e = _level_energy(u_n, n, params.form)
        terms.append(besov_weight(params.kind, params.beta, n) * float(e))
    return terms


def besov_partial_sum(u, params: BesovParams) -> float:
    """Truncated semi-norm sum; see besov_partial_terms for the tail."""
    return float(sum(besov_partial_terms(u, params)))


def classify_tail(terms: Sequence[float]) -> str:
    """Convergence flag from the last term ratio: non-shrinking terms mean
    the full series diverges."""
    if len(terms) < 2 or terms[-1] == 0.0:
        return "converged"
    if terms[-2] == 0.0:
        return "diverging"
    ratio = terms[-1] / terms[-2]
    return "decreasing" if ratio < 1.0 - 1e-9 else "diverging"


# ---------------------------------------------------------------------------
# Monte Carlo double integral
#
# A random point of the fractal is a uniformly random digit string truncated
# at a fixed depth; the estimator stratifies a pair of such strings by the
# length of their common prefix, whose probability is known exactly.  Pairs
# falling in the same depth-d cell (and pairs whose representative corners
# coincide) contribute zero; that truncation error is the acknowledged bias
# of the depth cutoff.

def _digit_tables(kind: FractalKind) -> tuple[np.ndarray, np.ndarray, int]:
    if kind is FractalKind.SG:
        return np.array(SG_AX), np.array(SG_AY), 2
    return np.array(SC_OX), np.array(SC_OY), 3

def _anchor_coords(kind: FractalKind, digits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integer coordinates of each row's cell base corner (digits: m x d)."""
    ax, ay, mul = _digit_tables(kind)
    gx = np.zeros(digits.shape[0], dtype=np.int64)
    gy = np.zeros(digits.shape[0], dtype=np.int64)
    for c in range(digits.shape[1]):
        d = digits[:, c]
        gx = mul * gx + ax[d]
        gy = mul * gy + ay[d]
    if kind is FractalKind.SG:
        return gx, gy
    return 2 * gx, 2 * gy


def _sq_dist_from_anchors(kind: FractalKind, gx1, gy1, gx2, gy2, depth: int) -> np.ndarray:
    dx = (gx1 - gx2).astype(float)
    dy = (gy1 - gy2).astype(float)
    if kind is FractalKind.SG:
        return (dx * dx + 3.0 * dy * dy) / 4.0 ** (depth + 1)
    return (dx * dx + dy * dy) / (4.0 * 9.0 ** depth)


def _sg_harmonic_values(h: SgHarmonic, digits: np.ndarray) -> np.ndarray:
    """Vectorized harmonic values at the base corners of the rows' cells."""
    a, b, c = (float(v) for v in h.boundary)
    m = digits.shape[0]
    X = np.full(m, a)
    Y = np.full(m, b)
    Z = np.full(m, c)
    for col in range(digits.shape[1]):
        d = digits[:, col]
        m01 = (2 * X + 2 * Y + Z) / 5.0
        m02 = (2 * X + Y + 2 * Z) / 5.0
        m12 = (X + 2 * Y + 2 * Z) / 5.0
        is0 = d == 0
        is1 = d == 1
        is2 = d == 2
        Xn = np.where(is0, X, np.where(is1, m01, m02))
        Yn = np.where(is0, m01, np.where(is1, Y, m12))
        Zn = np.where(is0, m02, np.where(is1, m12, Z))
        X, Y, Z = Xn, Yn, Zn
    return X


def _graph_lookup_values(u: VertexFunction, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    vals = u.as_float_array()
    index = u.graph.index
    out = np.empty(len(gx))
    for i in range(len(gx)):
        out[i] = vals[index[(int(gx[i]), int(gy[i]))]]
    return out


def besov_double_integral_mc(
    u,
    beta: float,
    samples: int = 200_000,
    seed: int = 0,
    kind: Optional[FractalKind] = None,
    depth: Optional[int] = None,
) -> tuple[float, float]:
    """Stratified Monte Carlo estimate of the singular double integral.

    Returns (estimate, stderr).  Graph-bound data caps the depth at its own
    level; the harmonic family and coordinate callables evaluate at any
    depth.
    """
    if isinstance(u, SgHarmonic):
        kind = FractalKind.SG
        evaluate = lambda digs, gx, gy: _sg_harmonic_values(u, digs)
    elif isinstance(u, ScGoodFunction):
        kind = FractalKind.SC
        depth = min(depth or MC_DEPTH_DEFAULT[kind], u.level)
        evaluate = lambda digs, gx, gy: _graph_lookup_values(u.fn, gx, gy)
    elif isinstance(u, VertexFunction):
        kind = u.graph.kind
        depth = min(depth or MC_DEPTH_DEFAULT[kind], u.graph.level)
        evaluate = lambda digs, gx, gy: _graph_lookup_values(u, gx, gy)
    elif callable(u):
        if kind is None:
            raise ValueError("callable input needs an explicit kind")
        scale_den = None
        def evaluate(digs, gx, gy, _u=u):
            nonlocal scale_den
            if scale_den is None:
                s = digs.shape[1] + 1 if kind is FractalKind.SG else digs.shape[1]
                scale_den = float(2 ** s) if kind is FractalKind.SG else 2.0 * 3.0 ** s
            if kind is FractalKind.SG:
                return np.asarray(_u(gx / scale_den, gy * math.sqrt(3.0) / scale_den))
            return np.asarray(_u(gx / scale_den, gy / scale_den))
    else:
        raise TypeError(f"cannot sample {type(u).__name__}")
    if depth is None:
        depth = MC_DEPTH_DEFAULT[kind]
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if samples < 2 * depth:
        raise ValueError("need at least two samples per stratum")
    crit = (
        SG_BETA_STAR
        if kind is FractalKind.SG
        else sc_beta_star(SC_RHO_NUMERIC)
    )
    if beta >= crit:
        warnings.warn(
            f"beta={beta} at or above the critical exponent {crit:.6f}: "
            "the integral may be infinite; the estimate reflects only the "
            "sampled depth",
            RuntimeWarning,
            stacklevel=2,
        )

    K = kind.n_maps
    expo = (kind.alpha + beta) / 2.0
    rng = np.random.default_rng(seed)
    per = samples // depth
    est = 0.0
    var = 0.0
    for k in range(depth):
        # common prefix of length k, distinct next digits, free tails
        p_k = (1.0 - 1.0 / K) / K ** k
        common = rng.integers(0, K, size=(per, k))
        d1 = rng.integers(0, K, size=per)
        shift = rng.integers(1, K, size=per)
        d2 = (d1 + shift) % K
        tail_len = depth - k - 1
        t1 = rng.integers(0, K, size=(per, tail_len))
        t2 = rng.integers(0, K, size=(per, tail_len))
        digs1 = np.concatenate([common, d1[:, None], t1], axis=1)
        digs2 = np.concatenate([common, d2[:, None], t2], axis=1)
        gx1, gy1 = _anchor_coords(kind, digs1)
        gx2, gy2 = _anchor_coords(kind, digs2)
        sq = _sq_dist_from_anchors(kind, gx1, gy1, gx2, gy2, depth)
        v1 = evaluate(digs1, gx1, gy1)
        v2 = evaluate(digs2, gx2, gy2)
        du = v1 - v2
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(sq > 0.0, du * du / sq ** expo, 0.0)
        est += p_k * float(f.mean())
        var += p_k ** 2 * float(f.var(ddof=1)) / per
    return est, math.sqrt(var)


# ---------------------------------------------------------------------------
# monotone limit of the rescaled sums

def _geometric_tail(terms: Sequence[float], tol: float) -> tuple[float, float]:
    """(tail value, residual bound) extending a geometrically decaying tail.

    Uses the last observed term ratio; exact for exactly geometric data."""
    if len(terms) < 2 or terms[-1] == 0.0:
        return 0.0, 0.0
    q = terms[-1] / terms[-2]
    if q >= 1.0:
        return 0.0, math.inf
    tail = terms[-1] * q / (1.0 - q)
    # residual: drift of the observed ratios
    qprev = terms[-2] / terms[-3] if len(terms) >= 3 and terms[-3] != 0 else q
    drift = abs(q - qprev)
    bound = tail * drift / max(1.0 - q, tol)
    return tail, bound


def sg_monotone_limit(
    u,
    beta_grid: Sequence[float],
    probe_levels: int = 6,
    tol: float = 1e-10,
) -> list[tuple[float, float, float]]:
    """Rows (beta, (1 - 2^beta/5) * E_beta, tail_bound) on the gasket.

    E_beta is summed over probed levels and the geometric tail is added in
    closed form; for the harmonic family the level energies are exactly
    geometric, so the tail bound is zero drift.
    """
    alpha = FractalKind.SG.alpha
    for b in beta_grid:
        if not alpha < b < SG_BETA_STAR:
            raise ValueError(f"beta={b} outside ({alpha}, {SG_BETA_STAR})")
    uf = _as_vertex_function(u, FractalKind.SG, probe_levels)
    energies = []
    for n in range(1, probe_levels + 1):
        u_n = (
            uf
            if n == uf.graph.level
            else restrict_to_level(uf, cached_vertex_graph(FractalKind.SG, n))
        )
        energies.append(float(sg_pointwise_energy_Bn(u_n, n)))
    rows = []
    for b in beta_grid:
        lam_factor = 1.0 - 2.0 ** b / 5.0
        terms = [besov_weight(FractalKind.SG, b, n) * e for n, e in enumerate(energies, 1)]
        tail, bound = _geometric_tail(terms, tol)
        rows.append((float(b), lam_factor * (sum(terms) + tail), lam_factor * bound))
    return rows


def discounted_monotone_value(seq: Sequence[float], lam: float) -> float:
    """(1-lam) * sum_n lam^n x_n for x constant past the end of seq."""
    if not 0 < lam < 1:
        raise ValueError("lam must be in (0,1)")
    total = 0.0
    for n, x in enumerate(seq, 1):
        total += lam ** n * x
    total += seq[-1] * lam ** (len(seq) + 1) / (1.0 - lam)
    return (1.0 - lam) * total


# ---------------------------------------------------------------------------
# walk dimension from energy decay

def walkdim_estimate(
    values: Sequence[float], base: int, ns: Optional[Sequence[int]] = None
) -> float:
    """alpha + log(1/sigma)/log(base) from the fitted geometric ratio sigma
    of the level energies."""
    if base == 2:
        alpha = FractalKind.SG.alpha
    elif base == 3:
        alpha = FractalKind.SC.alpha
    else:
        raise ValueError("base must be 2 or 3")
    values = list(values)
    if len(values) < 3:
        raise ValueError("need at least 3 terms")
    if ns is None:
        ns = range(1, len(values) + 1)
    ratio, _ = fit_log_geometric(ns, values)
    return alpha - math.log(ratio) / math.log(base)


# ---------------------------------------------------------------------------
# trace comparison on the bottom edge

def interval_trace_check(
    u, beta1: float, N: int = 6
) -> tuple[float, float]:
    """(gasket semi-norm, dyadic interval semi-norm of the bottom-edge trace).

    The interval weight uses beta2 = beta1 - alpha + 1, so both sums carry the
    same per-level factor and the interval sum ranges over a subset of the
    gasket's per-cell pairs; the first value dominates the second term by
    term.
    """
    alpha = FractalKind.SG.alpha
    if not alpha < beta1 < SG_BETA_STAR:
        raise ValueError(f"beta1={beta1} outside ({alpha}, {SG_BETA_STAR})")
    uf = _as_vertex_function(u, FractalKind.SG, N)
    sg_sum = besov_partial_sum(
        uf, BesovParams(beta=beta1, N=N, kind=FractalKind.SG)
    )
    vg = uf.graph
    vals = uf.as_float_array()
    s = vg.scale
    beta2 = beta1 - alpha + 1.0
    interval = 0.0
    for n in range(1, N + 1):
        step = 2 ** (s - n)
        ids = [vg.index[(i * step, 0)] for i in range(2 ** n + 1)]
        edge_vals = vals[ids]
        d = np.diff(edge_vals)
        interval += 2.0 ** ((beta2 - 1.0) * n) * float(np.dot(d, d))
    return sg_sum, interval


# ---------------------------------------------------------------------------
# jump kernel pointwise evaluation

@dataclass(frozen=True)
class JumpKernelParams:
    """Approximation-step parameters for the bounded-kernel construction.

    Phi maps the step index to the truncation level of the outer sum and must
    satisfy (1 - 2^beta_i/5) * Phi(i) >= i.
    """

    i: int
    delta_i: float
    gamma: int
    beta_i: float
    Phi: Optional[Callable[[int], int]] = None

    def __post_init__(self) -> None:
        alpha = FractalKind.SG.alpha
        if self.i < 1:
            raise ValueError("i must be >= 1")
        if not 0 < self.delta_i < 1:
            raise ValueError("delta_i must be in (0,1)")
        if not alpha < self.beta_i < SG_BETA_STAR:
            raise ValueError("beta_i must lie in (alpha, beta*)")
        if self.gamma < 1 or self.gamma != int(self.gamma):
            raise ValueError("gamma must be a positive integer")
        if not (self.gamma > alpha and self.gamma > 2 * alpha / (self.beta_i - alpha)):
            raise ValueError(
                "gamma too small: needs gamma > alpha and "
                "gamma > 2*alpha/(beta_i - alpha)"
            )
        slack = 1.0 - 2.0 ** self.beta_i / 5.0
        if slack * self.phi_value() < self.i - 1e-12:
            raise ValueError("Phi violates (1 - 2^beta_i/5) * Phi(i) >= i")

    def phi_value(self) -> int:
        if self.Phi is not None:
            return int(self.Phi(self.i))
        slack = 1.0 - 2.0 ** self.beta_i / 5.0
        return math.ceil(self.i / slack)

    def run_length(self, n: int) -> int:
        return self.gamma * n * self.i

    def required_depth(self) -> int:
        N = self.phi_value()
        return N + self.run_length(N)


def _has_constant_run(digits: Sequence[int], start: int, length: int) -> Optional[int]:
    """The repeated digit if digits[start:start+length] is constant."""
    seg = digits[start : start + length]
    if len(seg) < length:
        return None
    d0 = seg[0]
    return d0 if all(d == d0 for d in seg) else None


def jump_kernel_Ci(x, y, params: JumpKernelParams) -> tuple[int, float]:
    """Pointwise kernel value C_i(x, y) and the blended weight a_i.

    x and y are digit prefixes of at least required_depth() digits.  A level
    n <= Phi(i) contributes when x and y share their first n digits and each
    then repeats a single digit gamma*n*i times; the contribution is
    3^(2*gamma*n*i) exactly.
    """
    xd = tuple(int(d) for d in x)
    yd = tuple(int(d) for d in y)
    need = params.required_depth()
    if len(xd) < need or len(yd) < need:
        raise ValueError(f"prefixes must have at least {need} digits")
    if xd == yd:
        raise ValueError("x and y must differ as sampled prefixes")
    for d in xd + yd:
        if not 0 <= d <= 2:
            raise ValueError("digits must be in {0,1,2}")
    C = 0
    for n in range(1, params.phi_value() + 1):
        if xd[:n] != yd[:n]:
            break
        g = params.run_length(n)
        px = _has_constant_run(xd, n, g)
        py = _has_constant_run(yd, n, g)
        if px is not None and py is not None:
            C += 3 ** (2 * g)
    try:
        a = params.delta_i * float(C) + (1.0 - params.delta_i)
    except OverflowError:
        a = math.inf
    return C, a
