#!/usr/bin/env python3
"""Tabulate discrete multiscale semi-norms against the Monte Carlo double
integral for a few test functions on each fractal.  The two should agree up
to a bounded ratio below the critical exponent."""

import argparse
import warnings

from fractalforms.kinds import FractalKind
from fractalforms.besov import BesovParams, besov_double_integral_mc, besov_partial_sum
from fractalforms.harmonic import sc_good_function, sg_harmonic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", type=str, default="1.9,2.0,2.1")
    ap.add_argument("--samples", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    betas = [float(b) for b in args.betas.split(",")]

    cases = [
        (FractalKind.SG, "harmonic(0,1,0)", sg_harmonic(0, 1, 0, 6), 6),
        (FractalKind.SG, "coordinate x", lambda px, py: px, 6),
        (FractalKind.SC, "good function", sc_good_function(4).fn, 4),
        (FractalKind.SC, "coordinate x", lambda px, py: px, 4),
    ]
    print(f"{'fractal':>7} {'function':>16} {'beta':>5} {'discrete':>10} "
          f"{'mc':>10} {'stderr':>8} {'ratio':>7}")
    for kind, name, fn, N in cases:
        for beta in betas:
            disc = besov_partial_sum(fn, BesovParams(beta=beta, N=N, kind=kind))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                mc, se = besov_double_integral_mc(
                    fn, beta, samples=args.samples, seed=args.seed, kind=kind)
            print(f"{kind.name:>7} {name:>16} {beta:>5.2f} {disc:>10.4f} "
                  f"{mc:>10.4f} {se:>8.4f} {disc / mc:>7.3f}")


if __name__ == "__main__":
    main()
