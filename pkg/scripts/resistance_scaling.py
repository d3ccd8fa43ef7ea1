#!/usr/bin/env python3
"""Print the resistance growth tables for both fractals and the fitted
scaling exponents.  Levels are capped by runtime, not by the library."""

import argparse
import math
import time

from fractalforms.networks import rho_estimate, sc_RnV, sg_word_resistance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sg-levels", type=int, default=8)
    ap.add_argument("--sc-levels", type=int, default=5)
    args = ap.parse_args()

    print("gasket cell-graph resistance (opposite corners, closed form (5/3)^n - 1)")
    print(f"{'n':>3} {'R_n':>18} {'closed form':>18} {'rel err':>10}")
    for n in range(1, args.sg_levels + 1):
        got = sg_word_resistance(n).resistance
        expect = (5.0 / 3.0) ** n - 1.0
        print(f"{n:>3} {got:>18.12f} {expect:>18.12f} {abs(got - expect) / expect:>10.1e}")

    print()
    print("carpet left-right plate resistance")
    print(f"{'n':>3} {'R_n^V':>14} {'ratio':>10} {'seconds':>8}")
    values = []
    for n in range(1, args.sc_levels + 1):
        t0 = time.time()
        values.append(sc_RnV(n).resistance)
        ratio = values[-1] / values[-2] if n > 1 else float("nan")
        print(f"{n:>3} {values[-1]:>14.9f} {ratio:>10.6f} {time.time() - t0:>8.1f}")
    if len(values) >= 3:
        est = rho_estimate(range(1, len(values) + 1), values, fit_from=2)
        print(f"fitted growth factor rho_hat = {est.rho_hat:.7f}")
        print(f"implied critical exponent log(8*rho_hat)/log(3) = {est.beta_star_hat:.7f}")
        print(f"gasket critical exponent log(5)/log(2)          = {math.log(5) / math.log(2):.7f}")


if __name__ == "__main__":
    main()
