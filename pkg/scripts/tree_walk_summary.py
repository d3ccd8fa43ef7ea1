#!/usr/bin/env python3
"""Exercise the return-ratio walk on the augmented ternary tree: Green value
brackets vs 1/(1-lambda), hitting-probability brackets vs lambda^|x|, the
boundary hit distribution, and the continuous-time lifetime."""

import argparse

import numpy as np

from fractalforms.treewalk import (
    WalkParams,
    boundary_hit_distribution,
    ctrw_lifetime,
    ctrw_lifetime_closed_form,
    green_oo,
    hitting_prob_F,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambdas", type=str, default="0.25,0.5,0.9")
    ap.add_argument("--c", type=float, default=None, help="clock base, needs c < min lambda")
    ap.add_argument("--samples", type=int, default=50_000)
    ap.add_argument("--depth-cut", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for lam in (float(x) for x in args.lambdas.split(",")):
        p = WalkParams(lam=lam, c=args.c, seed=args.seed, samples=args.samples,
                       depth_cut=args.depth_cut)
        g = green_oo(p, mode="exact")
        gm = green_oo(p, mode="mc")
        print(f"lambda={lam}")
        print(f"  G(o,o): bracket [{g['lower']:.6f}, {g['upper']:.6f}]"
              f"  target {1 / (1 - lam):.6f}  mc {gm['mean']:.4f} +- {gm['stderr']:.4f}")
        for w in ("0", "01", "012"):
            lo, hi = hitting_prob_F(w, p)
            print(f"  F({w!r}): [{lo:.8f}, {hi:.8f}]  target {lam ** len(w):.8f}")
        hit = boundary_hit_distribution(p, m=1)
        print(f"  first-digit hit freqs {np.round(hit['freqs'], 4)} (uniform 1/3)")
        if args.c is not None and args.c < lam:
            mean, se = ctrw_lifetime(p)
            print(f"  lifetime mc {mean:.4f} +- {se:.4f}"
                  f"  closed form {ctrw_lifetime_closed_form(p):.4f}")


if __name__ == "__main__":
    main()
