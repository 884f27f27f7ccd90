"""Image box dimension and Frostman certificates for the dimension-one family.

    python3 scripts/run_minimality.py --depth 18 --out results/minimality.csv
"""

import argparse
import csv
import time
from fractions import Fraction

from qsminimal import Identity, PiecewiseLinear, Power, dim_one_family, middle_thirds
from qsminimal.measure import minimality_experiment

MAPS = {
    "identity": Identity(),
    "power(4/5)": Power(Fraction(4, 5)),
    "power(5/4)": Power(Fraction(5, 4)),
    "piecewise": PiecewiseLinear(("1/4", "5/8"), ("1/2", "2", "1/3")),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--depth", type=int, default=18)
    ap.add_argument("--precision", type=int, default=15)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    cases = [("dim-one", name, dim_one_family(), f) for name, f in MAPS.items()]
    cases.append(("middle-thirds", "identity", middle_thirds(), Identity()))
    header = ["set", "map", "box_dim", "rms", "box_dim_all_scales", "M_hat", "q",
              "certified_d", "r_growth", "step2_max_components", "seconds", "flags"]
    rows = [header]
    for set_name, map_name, spec, f in cases:
        depth = min(args.depth, 12) if set_name == "middle-thirds" else args.depth
        t0 = time.perf_counter()
        s = minimality_experiment(spec, f, depth, precision=args.precision, seed=args.seed)
        dt = time.perf_counter() - t0
        rows.append([set_name, map_name, f"{s.box.slope:.4f}", f"{s.box.residual:.4f}",
                     f"{s.box_all_scales.slope:.4f}", f"{s.M_hat:.4f}", f"{s.q:.4f}",
                     "" if s.certified_d is None else f"{s.certified_d:.4f}",
                     f"{s.r_growth:.4f}", s.step2.max_components, f"{dt:.1f}",
                     " | ".join(s.flags)])
        print("  ".join(str(v) for v in rows[-1]))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)


if __name__ == "__main__":
    main()
