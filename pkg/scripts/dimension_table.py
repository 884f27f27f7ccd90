"""Formula partials for a few families, with and without end gaps."""

import argparse
import math

from qsminimal import dim_one_family, full_interval, middle_thirds, normalize_params, uniform_cantor
from qsminimal.dimension import hausdorff_formula_estimate, mlema_checks

FAMILIES = {
    "middle-thirds": middle_thirds(),
    "uniform(3, 1/5)": uniform_cantor(3, "1/5"),
    "full interval": full_interval(),
    "dim-one (power 2)": dim_one_family(),
    "dim-one (power 3)": dim_one_family(power=3),
    "end gaps 1/6": normalize_params({"branching": [2], "ratio": ["1/4"],
                                      "gaps": [["1/6", "1/6", "1/6"]], "tail": "periodic"}),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("-K", type=int, default=30)
    ap.add_argument("--window", type=int, default=10)
    args = ap.parse_args()

    print(f"{'family':20s} {'estimate':>10s} {'with ends':>10s} {'(N d)^1/K':>10s}")
    for name, spec in FAMILIES.items():
        rep = hausdorff_formula_estimate(spec, args.K, args.window)
        ends = min(v for _, v in rep.partials_end_gaps[-args.window:])
        roots, _, _ = mlema_checks(spec, args.K, 1.0, 0.1)
        print(f"{name:20s} {rep.estimate:10.6f} {ends:10.6f} {roots[-1]:10.6f}")
    print(f"\nlog2/log3 = {math.log(2) / math.log(3):.6f}, log3/log5 = {math.log(3) / math.log(5):.6f}")


if __name__ == "__main__":
    main()
