"""Command-line front end tying the library into reproducible experiment runs.

Each subcommand computes one family of quantities and writes a CSV or JSON
report plus a meta sidecar through the reporting module.  Exit codes: 0 ok,
2 invalid configuration or parameters, 3 resource cap exceeded, 4 linear
solver failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from typing import Optional

import numpy as np

from .besov import (
    BesovParams,
    besov_double_integral_mc,
    besov_partial_sum,
    interval_trace_check,
    JumpKernelParams,
    jump_kernel_Ci,
    sg_monotone_limit,
    walkdim_estimate,
)
from .cache import Cache
from .config import (
    ConfigError,
    RunConfig,
    apply_overrides,
    config_dict,
    load_config,
)
from .energies import VertexFunction, restrict_to_level, sg_pointwise_energy_Bn
from .geometry import cached_vertex_graph, vertex_graph
from .harmonic import (
    harnack_ball,
    harnack_solve,
    sc_good_function,
    sg_harmonic,
    strip_energy_checks,
)
from .kinds import FractalKind, SG_BETA_STAR
from .networks import SolverError, rho_estimate, sc_RnV, sg_word_resistance
from .reporting import ExperimentReport
from .treewalk import (
    WalkParams,
    boundary_hit_distribution,
    ctrw_lifetime,
    ctrw_lifetime_closed_form,
    green_oo,
    hitting_prob_F,
)
from .words import enumerate_words

GRAPH_CACHE_VERSION = 1
GRAPH_CACHE_MAX_LEVEL = 5

SUBCOMMANDS = (
    "resistance",
    "walkdim",
    "energy",
    "goodfn",
    "harnack",
    "besov",
    "mosco",
    "walk",
    "trace",
    "kernel",
)


class ResourceCapError(RuntimeError):
    """Requested work beyond the configured caps; maps to exit code 3."""


def _parse_levels(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ConfigError(f"empty level range {text!r}")
        return list(range(lo, hi + 1))
    return [int(x) for x in text.split(",")]


def _check_levels(levels, cap: int) -> None:
    if not levels or min(levels) < 1:
        raise ConfigError("levels must be >= 1")
    if max(levels) > cap:
        raise ResourceCapError(f"level {max(levels)} beyond the cap {cap}")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _function_for(name: str, kind: FractalKind, level: int, cfg: RunConfig):
    """Test-function selector: harmonic:a,b,c | goodfn | x."""
    if name.startswith("harmonic:"):
        if kind is not FractalKind.SG:
            raise ConfigError("harmonic boundary functions live on the gasket")
        triple = _parse_floats(name.split(":", 1)[1])
        if len(triple) != 3:
            raise ConfigError("harmonic takes three boundary values")
        vals = [Fraction(t).limit_denominator(10**6) for t in triple]
        return sg_harmonic(*vals, level)
    if name == "goodfn":
        if kind is not FractalKind.SC:
            raise ConfigError("goodfn lives on the carpet")
        return sc_good_function(level, tol=cfg.solver_tol, dense_limit=cfg.dense_limit)
    if name == "x":
        return lambda px, py: px
    raise ConfigError(f"unknown function name {name!r}")


def _walk_params(cfg: RunConfig, opts: argparse.Namespace) -> WalkParams:
    lam = cfg.lam if getattr(opts, "lam", None) is None else opts.lam
    c = cfg.c if getattr(opts, "c", None) is None else opts.c
    samples = cfg.samples if getattr(opts, "samples", None) is None else opts.samples
    depth = cfg.depth_cut if getattr(opts, "depth_cut", None) is None else opts.depth_cut
    if depth > 13:
        raise ResourceCapError(f"depth_cut {depth} beyond the working cap 13")
    try:
        return WalkParams(
            lam=lam,
            C1=cfg.C1,
            C2=cfg.C2,
            c=c,
            seed=cfg.seed,
            samples=samples,
            depth_cut=depth,
            workers=cfg.threads,
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e


# ---------------------------------------------------------------------------
# handlers


def _run_resistance(cfg: RunConfig, opts) -> ExperimentReport:
    kind = cfg.fractal_kind()
    levels = _parse_levels(opts.levels)
    _check_levels(levels, cfg.level_cap())
    cache = Cache(cfg.cache_dir)
    t0 = time.time()
    values = []
    for n in levels:
        if kind is FractalKind.SG:
            res = sg_word_resistance(n, tol=cfg.solver_tol, dense_limit=cfg.dense_limit)
        else:
            if n <= GRAPH_CACHE_MAX_LEVEL:
                vg = cache.get_or_build(
                    (cfg.kind, n, "vertex-graph", GRAPH_CACHE_VERSION),
                    lambda n=n: vertex_graph(kind, n),
                )
            else:
                vg = vertex_graph(kind, n)
            res = sc_RnV(vg, tol=cfg.solver_tol, dense_limit=cfg.dense_limit)
        values.append(res.resistance)
    if opts.timing:
        print(
            f"resistance: {len(levels)} levels in {time.time() - t0:.3f}s "
            f"(cache hits {cache.hits}, misses {cache.misses})",
            file=sys.stderr,
        )
    rows = []
    for i, (n, v) in enumerate(zip(levels, values)):
        ratio = "" if i == 0 else v / values[i - 1]
        if i >= 2:
            est = rho_estimate(levels[: i + 1], values[: i + 1], fit_from=2)
            rho_hat = est.rho_hat
        else:
            rho_hat = ""
        rows.append((n, v, ratio, rho_hat))
    return _report("resistance", cfg, opts, columns=("n", "RnV", "ratio", "rho_hat"), rows=rows)


def _run_walkdim(cfg: RunConfig, opts) -> ExperimentReport:
    kind = cfg.fractal_kind()
    levels = _parse_levels(opts.levels)
    _check_levels(levels, cfg.level_cap())
    top = max(levels)
    fn = _function_for(opts.function, kind, top, cfg)
    energies = []
    if kind is FractalKind.SG:
        base = 2
        if not isinstance(fn, VertexFunction):
            raise ConfigError("walkdim on the gasket needs a harmonic function")
        for n in levels:
            u_n = fn if n == top else restrict_to_level(fn, cached_vertex_graph(kind, n))
            energies.append(float(sg_pointwise_energy_Bn(u_n, n)))
    else:
        base = 3
        if opts.function != "goodfn":
            raise ConfigError("walkdim on the carpet uses the goodfn family")
        for n in levels:
            g = sc_good_function(n, tol=cfg.solver_tol, dense_limit=cfg.dense_limit)
            energies.append(g.energy)
    rows = []
    for i, (n, e) in enumerate(zip(levels, energies)):
        ratio = "" if i == 0 else e / energies[i - 1]
        beta_hat = (
            walkdim_estimate(energies[: i + 1], base, ns=levels[: i + 1]) if i >= 2 else ""
        )
        rows.append((n, e, ratio, beta_hat))
    return _report("walkdim", cfg, opts, columns=("n", "energy", "ratio", "beta_hat"), rows=rows)


def _run_energy(cfg: RunConfig, opts) -> ExperimentReport:
    kind = cfg.fractal_kind()
    levels = _parse_levels(opts.levels)
    _check_levels(levels, cfg.level_cap())
    if kind is FractalKind.SG:
        triple = _parse_floats(opts.boundary)
        if len(triple) != 3:
            raise ConfigError("boundary needs three values")
        vals = [Fraction(t).limit_denominator(10**6) for t in triple]
        top = max(levels)
        uf = sg_harmonic(*vals, top)
        from .energies import kigami_energy_En, sg_graph_energy_An

        rows = []
        for n in levels:
            u_n = uf if n == top else restrict_to_level(uf, cached_vertex_graph(kind, n))
            rows.append(
                (
                    n,
                    float(sg_pointwise_energy_Bn(u_n, n)),
                    float(kigami_energy_En(u_n, n)),
                    float(sg_graph_energy_An(u_n, n)),
                )
            )
        return _report("energy", cfg, opts, columns=("n", "Bn", "En", "An"), rows=rows)
    rows = []
    for n in levels:
        d, cantor = strip_energy_checks(n)
        rows.append((n, float(d), float(cantor)))
    return _report(
        "energy", cfg, opts, columns=("n", "strip_pointwise", "cantor_strip"), rows=rows
    )


def _run_goodfn(cfg: RunConfig, opts) -> ExperimentReport:
    if cfg.kind != "sc":
        raise ConfigError("goodfn runs on the carpet; pass kind=sc")
    n = opts.level
    _check_levels([n], cfg.level_cap())
    g = sc_good_function(n, tol=cfg.solver_tol, dense_limit=cfg.dense_limit)
    tree = g.values_json_dict()
    tree["resistance"] = 1.0 / g.energy
    return _report("goodfn", cfg, opts, tree=tree)


def _run_harnack(cfg: RunConfig, opts) -> ExperimentReport:
    if cfg.kind != "sc":
        raise ConfigError("the Harnack experiment runs on the carpet; pass kind=sc")
    levels = _parse_levels(opts.levels)
    _check_levels(levels, cfg.level_cap())
    center = (Fraction(1, 2), Fraction(1, 3))
    r, delta = Fraction(1, 4), Fraction(1, 2)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for n in levels:
        ball = harnack_ball(n, center, r, delta)
        for trial in range(opts.trials):
            bvals = rng.uniform(0.0, 1.0, len(ball.boundary_ids))
            u = harnack_solve(ball, bvals, tol=cfg.solver_tol, dense_limit=cfg.dense_limit)
            inner = u[ball.inner_ids]
            rows.append((n, trial, float(inner.max() / inner.min())))
    return _report("harnack", cfg, opts, columns=("level", "trial", "ratio"), rows=rows)


def _run_besov(cfg: RunConfig, opts) -> ExperimentReport:
    kind = cfg.fractal_kind()
    betas = cfg.beta_grid or _parse_floats(opts.beta_grid)
    N = opts.depth if opts.depth is not None else (6 if kind is FractalKind.SG else 4)
    _check_levels([N], cfg.level_cap())
    fn = _function_for(opts.function, kind, max(N, 4), cfg)
    rows = []
    for beta in betas:
        discrete = besov_partial_sum(fn, BesovParams(beta=beta, N=N, kind=kind))
        mc, se = besov_double_integral_mc(
            fn, beta, samples=cfg.mc_samples, seed=cfg.seed, kind=kind
        )
        ratio = discrete / mc if mc > 0 else ""
        rows.append((beta, discrete, mc, se, ratio))
    return _report(
        "besov",
        cfg,
        opts,
        columns=("beta", "discrete_sum", "mc_estimate", "mc_stderr", "ratio"),
        rows=rows,
    )


def _run_mosco(cfg: RunConfig, opts) -> ExperimentReport:
    if cfg.kind != "sg":
        raise ConfigError("the monotone-limit experiment runs on the gasket")
    alpha = FractalKind.SG.alpha
    if cfg.beta_grid:
        betas = cfg.beta_grid
    else:
        betas = tuple(np.linspace(alpha + 0.05, SG_BETA_STAR - 0.005, opts.points))
    _check_levels([opts.depth], cfg.level_cap())
    triple = _parse_floats(opts.boundary)
    vals = [Fraction(t).limit_denominator(10**6) for t in triple]
    h = sg_harmonic(*vals, opts.depth)
    rows = sg_monotone_limit(h, betas, probe_levels=opts.depth)
    return _report(
        "mosco", cfg, opts, columns=("beta", "value", "tail_bound"), rows=list(rows)
    )


def _run_walk(cfg: RunConfig, opts) -> ExperimentReport:
    params = _walk_params(cfg, opts)
    exact = green_oo(params, "exact")
    mc = green_oo(params, "mc")
    f_rows = []
    for n in range(1, 4):
        for w in enumerate_words(FractalKind.SG, n):
            lo, hi = hitting_prob_F(w, params)
            f_rows.append(
                {
                    "x": "".join(map(str, w)),
                    "lower": lo,
                    "upper": hi,
                    "target": params.lam ** n,
                }
            )
    hit = boundary_hit_distribution(params, m=opts.m, samples=params.samples)
    tree = {
        "lambda": params.lam,
        "c": params.c,
        "G_oo": {
            "exact_lo": exact["lower"],
            "exact_hi": exact["upper"],
            "mc": mc["mean"],
            "stderr": mc["stderr"],
        },
        "F": f_rows,
        "hit_dist": {"m": hit["m"], "freqs": [float(f) for f in hit["freqs"]]},
    }
    if params.c is not None:
        mean, se = ctrw_lifetime(params)
        tree["lifetime"] = {
            "mean": mean,
            "stderr": se,
            "closed_form": ctrw_lifetime_closed_form(params),
        }
    return _report("walk", cfg, opts, tree=tree)


def _run_trace(cfg: RunConfig, opts) -> ExperimentReport:
    if cfg.kind != "sg":
        raise ConfigError("the trace comparison runs on the gasket")
    _check_levels([opts.depth], cfg.level_cap())
    fn = _function_for(opts.function, FractalKind.SG, opts.depth, cfg)
    try:
        sg_sum, interval_sum = interval_trace_check(fn, opts.beta1, N=opts.depth)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    beta2 = opts.beta1 - FractalKind.SG.alpha + 1.0
    rows = [
        (
            opts.beta1,
            beta2,
            sg_sum,
            interval_sum,
            int(interval_sum <= sg_sum + 1e-12),
        )
    ]
    return _report(
        "trace",
        cfg,
        opts,
        columns=("beta1", "beta2", "gasket_sum", "interval_sum", "dominated"),
        rows=rows,
    )


def _run_kernel(cfg: RunConfig, opts) -> ExperimentReport:
    try:
        params = JumpKernelParams(
            i=opts.i, delta_i=opts.delta, beta_i=opts.beta_i, gamma=opts.gamma
        )
        depth = params.required_depth()
        if opts.x is None or opts.y is None:
            x = "0" * depth
            y = "0" + "1" * (depth - 1)
        else:
            x, y = opts.x, opts.y
        C, a = jump_kernel_Ci(x, y, params)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    rows = [(opts.i, opts.delta, opts.gamma, opts.beta_i, x, y, float(C), a)]
    return _report(
        "kernel",
        cfg,
        opts,
        columns=("i", "delta_i", "gamma", "beta_i", "x", "y", "C_i", "a_i"),
        rows=rows,
    )


_HANDLERS = {
    "resistance": _run_resistance,
    "walkdim": _run_walkdim,
    "energy": _run_energy,
    "goodfn": _run_goodfn,
    "harnack": _run_harnack,
    "besov": _run_besov,
    "mosco": _run_mosco,
    "walk": _run_walk,
    "trace": _run_trace,
    "kernel": _run_kernel,
}


def _report(subcommand, cfg, opts, columns=None, rows=None, tree=None) -> ExperimentReport:
    snapshot = config_dict(cfg)
    snapshot["subcommand"] = subcommand
    snapshot["options"] = {
        k: v for k, v in sorted(vars(opts).items()) if k not in _GLOBAL_OPTS and v is not None
    }
    return ExperimentReport(
        experiment=subcommand,
        config_snapshot=snapshot,
        columns=columns,
        rows=rows,
        tree=tree,
    )


def run(subcommand: str, cfg: RunConfig, opts: Optional[argparse.Namespace] = None) -> ExperimentReport:
    """Dispatch a subcommand with an already-validated config."""
    if subcommand not in _HANDLERS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    if opts is None:
        opts = _build_parser().parse_args([subcommand])
    if getattr(opts, "function", None) is None and subcommand in ("walkdim", "besov"):
        opts.function = _default_function(subcommand, cfg.kind)
    return _HANDLERS[subcommand](cfg, opts)


# ---------------------------------------------------------------------------
# argument parsing

_GLOBAL_OPTS = {"config", "seed", "threads", "out", "cache", "level_cap", "kind", "command"}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--cache", help="cache directory")
    common.add_argument("--level-cap", dest="level_cap", type=int)
    common.add_argument("--kind", choices=("sg", "sc"))

    p = argparse.ArgumentParser(prog="fractalforms", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("resistance", parents=[common])
    sp.add_argument("--levels", default="1..5")
    sp.add_argument("--timing", action="store_true")

    sp = sub.add_parser("walkdim", parents=[common])
    sp.add_argument("--levels", default="1..5")
    sp.add_argument("--function", default=None)

    sp = sub.add_parser("energy", parents=[common])
    sp.add_argument("--levels", default="1..5")
    sp.add_argument("--boundary", default="0,1,0")

    sp = sub.add_parser("goodfn", parents=[common])
    sp.add_argument("--level", type=int, default=3)

    sp = sub.add_parser("harnack", parents=[common])
    sp.add_argument("--levels", default="3,4,5")
    sp.add_argument("--trials", type=int, default=50)

    sp = sub.add_parser("besov", parents=[common])
    sp.add_argument("--beta-grid", dest="beta_grid", default="1.9,2.0,2.1")
    sp.add_argument("--function", default=None)
    sp.add_argument("--depth", type=int, default=None)

    sp = sub.add_parser("mosco", parents=[common])
    sp.add_argument("--points", type=int, default=20)
    sp.add_argument("--boundary", default="0,1,0")
    sp.add_argument("--depth", type=int, default=6)

    sp = sub.add_parser("walk", parents=[common])
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--c", type=float, default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--depth-cut", dest="depth_cut", type=int, default=None)
    sp.add_argument("--m", type=int, default=2)

    sp = sub.add_parser("trace", parents=[common])
    sp.add_argument("--beta1", type=float, default=2.2)
    sp.add_argument("--function", default="harmonic:0,1,0")
    sp.add_argument("--depth", type=int, default=6)

    sp = sub.add_parser("kernel", parents=[common])
    sp.add_argument("--i", type=int, default=1)
    sp.add_argument("--delta", type=float, default=0.5)
    sp.add_argument("--gamma", type=int, default=6)
    sp.add_argument("--beta-i", dest="beta_i", type=float, default=2.2)
    sp.add_argument("--x", default=None)
    sp.add_argument("--y", default=None)

    return p


def _default_function(command: str, kind: str) -> str:
    if command in ("walkdim", "besov"):
        return "harmonic:0,1,0" if kind == "sg" else "goodfn"
    return "harmonic:0,1,0"


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    opts = parser.parse_args(argv)
    try:
        cfg = load_config(opts.config) if opts.config else RunConfig()
        overrides = {}
        if opts.kind is not None:
            overrides["kind"] = opts.kind
        if opts.seed is not None:
            overrides["seed"] = opts.seed
        if opts.threads is not None:
            overrides["threads"] = opts.threads
        if opts.out is not None:
            overrides["out_dir"] = opts.out
        if opts.cache is not None:
            overrides["cache_dir"] = opts.cache
        if opts.level_cap is not None:
            effective_kind = overrides.get("kind", cfg.kind)
            key = "level_cap_sg" if effective_kind == "sg" else "level_cap_sc"
            overrides[key] = opts.level_cap
        cfg = apply_overrides(cfg, **overrides)
        report = run(opts.command, cfg, opts)
        paths = report.write(cfg.out_dir)
        for path in paths:
            print(path)
        return 0
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ResourceCapError as e:
        print(f"resource cap: {e}", file=sys.stderr)
        return 3
    except MemoryError:
        print("resource cap: out of memory", file=sys.stderr)
        return 3
    except SolverError as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
