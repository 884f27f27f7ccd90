"""Distortion-bound battery over the map catalog on seeded random nested pairs."""

import argparse
import time
from fractions import Fraction

from qsminimal import Composition, Identity, PiecewiseLinear, Power
from qsminimal.qsmaps import distortion_check, estimate_M, random_nested_pairs

PL = PiecewiseLinear(("1/4", "5/8"), ("1/2", "2", "1/3"))
MAPS = {
    "identity": Identity(),
    "power(1/2)": Power(Fraction(1, 2)),
    "power(4/5)": Power(Fraction(4, 5)),
    "power(2)": Power(Fraction(2)),
    "piecewise": PL,
    "power(2) then piecewise": Composition((Power(Fraction(2)), PL)),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=10_000)
    ap.add_argument("--sweep-depth", type=int, default=14)
    ap.add_argument("--margin", type=float, default=0.05)
    ap.add_argument("--precision", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    pairs = random_nested_pairs(args.pairs, args.seed)
    print(f"{'map':26s} {'M_hat':>10s} {'fail':>5s} {'min slack lo':>13s} {'min slack hi':>13s}")
    for name, f in MAPS.items():
        t0 = time.perf_counter()
        M = estimate_M(f, args.sweep_depth, args.precision) * (1 + args.margin)
        rep = distortion_check(f, M, pairs, args.precision)
        lo = min(r.slack_lower for r in rep.rows)
        hi = min(r.slack_upper for r in rep.rows)
        print(f"{name:26s} {M:10.5f} {rep.failures:5d} {lo:13.3e} {hi:13.3e}"
              f"  ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
