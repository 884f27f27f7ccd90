"""Command-line front end.

    qsmin <command> --config run.json [--depth K] [--precision P] [--seed S] [--out DIR]

Exit codes: 0 success, 2 configuration or consistency error, 3 degenerate
mathematics, 4 precision loss.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import construction as con
from . import dimension as dim
from . import measure as ms
from . import qsmaps as qs
from .errors import ConfigError, QsMinimalError
from .numerics import format_rational, parse_rational

log = logging.getLogger("qsminimal")

COMMANDS = ("validate", "build", "dim", "boxdim", "qs-estimate", "distortion",
            "measure", "mlema", "minimality")


@dataclass
class ExperimentConfig:
    params: dict
    map: object = field(default_factory=lambda: {"kind": "identity"})
    depth: int = 12
    precision: int = 15
    d_fraction: float = 0.5
    scales: object = "construction"
    seed: int = 0
    output: str = "out"
    K: int = 30
    window: int = 10
    samples: int = 1000
    C_cap: float = 10.0

    def __post_init__(self):
        if self.depth < 1:
            raise ConfigError(f"depth must be >= 1, got {self.depth}")
        if self.precision < 15:
            raise ConfigError(f"precision must be >= 15, got {self.precision}")
        if not 0 < self.d_fraction < 1:
            raise ConfigError(f"d_fraction must lie in (0, 1), got {self.d_fraction}")

    @classmethod
    def load(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        params = doc.get("params")
        if params is None:
            raise ConfigError("config has no 'params'")
        if isinstance(params, str):
            ppath = (path.parent / params) if not Path(params).is_absolute() else Path(params)
            try:
                params = json.loads(ppath.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read params {ppath}: {exc}") from exc
        doc["params"] = params
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**doc)

    def param_spec(self, depth: int | None = None) -> con.ParamSpec:
        return con.normalize_params(self.params, depth)

    def qsmap(self) -> qs.QsMap:
        return qs.map_from_json(self.map)

    def scale_list(self, params: con.ParamSpec) -> list:
        if self.scales == "construction":
            return dim.construction_scales(params, self.depth)
        return [parse_rational(s) for s in self.scales]


# ---------------------------------------------------------------------------
# output helpers


def _write_json(out: Path, name: str, doc):
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_csv(out: Path, name: str, rows):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / name, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)


def loglog_svg(points, slope, intercept, title="") -> str:
    """Small static line chart of (log 1/eps, log count) with the fitted line."""
    w, h, pad = 480, 320, 40
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (w - 2 * pad)

    def sy(y):
        return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad)

    data = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in points)
    fit = f"{sx(x0):.2f},{sy(slope * x0 + intercept):.2f} {sx(x1):.2f},{sy(slope * x1 + intercept):.2f}"
    dots = "".join(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3"/>' for x, y in points)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">\n'
        f'<rect width="{w}" height="{h}" fill="white"/>\n'
        f'<line x1="{pad}" y1="{h - pad}" x2="{w - pad}" y2="{h - pad}" stroke="black"/>\n'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h - pad}" stroke="black"/>\n'
        f'<text x="{w / 2:.0f}" y="{h - 8}" text-anchor="middle">log(1/eps)</text>\n'
        f'<text x="12" y="{h / 2:.0f}" transform="rotate(-90 12 {h / 2:.0f})" '
        f'text-anchor="middle">log count</text>\n'
        f'<text x="{w / 2:.0f}" y="20" text-anchor="middle">{title} slope {slope:.4f}</text>\n'
        f'<polyline points="{fit}" fill="none" stroke="#c33" stroke-dasharray="4 3"/>\n'
        f'<polyline points="{data}" fill="none" stroke="#236"/>\n'
        f'<g fill="#236">{dots}</g>\n</svg>\n'
    )


def _loglog_rows(report: dim.BoxCountReport) -> list:
    rows = [["eps", "count", "log_inv_eps", "log_count"]]
    for e, c, (lx, ly) in zip(report.scales, report.counts, report.loglog()):
        rows.append([format_rational(e) if isinstance(e, Fraction) else repr(float(e)),
                     c, repr(lx), repr(ly)])
    return rows


# ---------------------------------------------------------------------------
# commands


def _classify(params: con.ParamSpec, depth: int) -> str:
    rules = [params.level(k) for k in range(1, depth + 1)]
    if all(all(e == 0 for e in r.e) for r in rules):
        return "degenerate (E = [0,1])"
    uniform = all(r.e[0] == 0 and r.e[-1] == 0 and len(set(r.e[1:-1])) == 1 for r in rules)
    kind = "uniform Cantor" if uniform else "homogeneous perfect"
    ncs = {r.n * r.c for r in rules}
    if len(ncs) == 1:
        return f"{kind}, n·c = {format_rational(ncs.pop())}"
    return f"{kind}, n·c in [{format_rational(min(ncs))}, {format_rational(max(ncs))}]"


def cmd_validate(cfg: ExperimentConfig, out: Path) -> dict:
    params = cfg.param_spec(cfg.depth)
    levels = []
    for k in range(1, cfg.depth + 1):
        r = params.level(k)
        levels.append({"k": k, "n": r.n, "c": format_rational(r.c),
                       "gaps": [format_rational(e) for e in r.e],
                       "n_times_c": format_rational(r.n * r.c), "status": "ok"})
    summary = f"valid, {_classify(params, cfg.depth)}"
    doc = {"status": summary, "levels_checked": cfg.depth,
           "tail_rule": params.tail_rule.kind, "levels": levels}
    _write_json(out, "report.json", doc)
    print(summary)
    return doc


def cmd_build(cfg: ExperimentConfig, out: Path) -> dict:
    params = cfg.param_spec(cfg.depth)
    level = con.build_level(params, cfg.depth)
    doc = {"level": cfg.depth, "count": level.count,
           "delta": format_rational(level.delta),
           "total_length": format_rational(level.total_length)}
    rows = [["index", "address", "left", "right"]]
    for i, iv in enumerate(level):
        rows.append([i, ".".join(map(str, iv.address)),
                     format_rational(iv.left), format_rational(iv.right)])
    _write_json(out, "report.json", doc)
    _write_csv(out, "intervals.csv", rows)
    print(f"level {cfg.depth}: {level.count} intervals, total length {doc['total_length']}")
    return doc


def cmd_dim(cfg: ExperimentConfig, out: Path) -> dict:
    params = cfg.param_spec()
    report = dim.hausdorff_formula_estimate(params, cfg.K, min(cfg.window, cfg.K))
    _write_json(out, "report.json", report.to_json())
    _write_csv(out, "partials.csv", report.csv_rows())
    print(f"dimension estimate {report.estimate:.10f} (window k={report.window[0]}..{report.window[1]})")
    return report.to_json()


def cmd_boxdim(cfg: ExperimentConfig, out: Path) -> dict:
    params = cfg.param_spec(cfg.depth)
    f = cfg.qsmap()
    level = con.build_level(params, cfg.depth)
    target = level if isinstance(f, qs.Identity) else dim.image_levelset(f, level, cfg.precision)
    report = dim.box_dim_estimate(target, cfg.scale_list(params))
    _write_json(out, "report.json", report.to_json())
    _write_csv(out, "loglog.csv", _loglog_rows(report))
    print(f"box-counting slope {report.slope:.6f} (rms residual {report.residual:.2e})")
    return report.to_json()


def cmd_qs_estimate(cfg: ExperimentConfig, out: Path) -> dict:
    f = cfg.qsmap()
    M = qs.estimate_M(f, cfg.depth, cfg.precision)
    pq = qs.pq_exponents(M, cfg.precision)
    doc = {"map": f.to_json(), "sweep_depth": cfg.depth, "M_hat": M, "p": pq.p, "q": pq.q}
    _write_json(out, "report.json", doc)
    print(f"M_hat = {M:.12g} (dyadic sweep depth {cfg.depth}); p = {pq.p:.10f}, q = {pq.q:.10f}")
    return doc


def cmd_distortion(cfg: ExperimentConfig, out: Path) -> dict:
    f = cfg.qsmap()
    M = qs.estimate_M(f, cfg.depth, cfg.precision)
    pairs = qs.dyadic_pair_battery(min(cfg.depth, 10))
    report = qs.distortion_check(f, M, pairs, cfg.precision)
    rows = [["J_left", "J_right", "I_left", "I_right", "lower", "ratio", "upper",
             "slack_lower", "slack_upper", "pass"]]
    for r in report.rows:
        rows.append([format_rational(r.J[0]), format_rational(r.J[1]),
                     format_rational(r.I[0]), format_rational(r.I[1]),
                     repr(r.lower), repr(r.ratio), repr(r.upper),
                     repr(r.slack_lower), repr(r.slack_upper), int(r.passed)])
    doc = {"map": f.to_json(), "sweep_depth": cfg.depth, "M_hat": M, "p": report.p,
           "q": report.q, "pairs": len(report.rows), "failures": report.failures,
           "pass": report.all_pass}
    _write_json(out, "report.json", doc)
    _write_csv(out, "distortion.csv", rows)
    print(f"M_hat = {M:.12g}; {len(report.rows)} nested pairs, {report.failures} failures")
    return doc


def cmd_measure(cfg: ExperimentConfig, out: Path) -> dict:
    params = cfg.param_spec(cfg.depth)
    f = cfg.qsmap()
    M = qs.estimate_M(f, 14, cfg.precision)
    pq = qs.pq_exponents(M)
    d = ms.choose_d(pq.q, cfg.d_fraction)
    tower = ms.build_image_tower(params, f, cfg.depth, cfg.precision)
    mu = ms.build_measure(tower, d)
    frost = ms.frostman_check(mu, C_cap=cfg.C_cap)
    step2 = ms.step2_window_check(mu, d, f, cfg.samples, cfg.seed)
    consts = ms.proof_constants(params, cfg.depth, M, d)
    chains = [ms.r_products(mu, c, consts) for c in ms.sample_chains(mu, 32, cfg.seed)]
    doc = {
        "d": d,
        "C_empirical": max(frost.C_empirical, step2.C_window),
        "windows_tested": step2.windows_tested,
        "seed": cfg.seed,
        "pass": frost.passed and step2.passed,
        "r_growth": min(r.growth for r in chains),
        "xi_zeta_margin": min(r.xi_zeta_margin for r in chains),
        "frostman": frost.to_json(),
        "step2": step2.to_json(),
    }
    rows = [["chain", "i", "r_i", "running_product"]]
    for rep in chains:
        tag = ".".join(map(str, rep.chain))
        for i, (r, p) in enumerate(zip(rep.r, rep.products)):
            rows.append([tag, i, repr(float(r)), repr(float(p))])
    _write_json(out, "report.json", doc)
    _write_csv(out, "rchains.csv", rows)
    print(f"d = {d:.6f}: C = {doc['C_empirical']:.6g}, pass = {doc['pass']}, "
          f"(prod r)^(1/k) >= {doc['r_growth']:.6f}")
    return doc


def cmd_mlema(cfg: ExperimentConfig, out: Path) -> dict:
    params = cfg.param_spec()
    f = cfg.qsmap()
    p = qs.pq_exponents(qs.estimate_M(f, 14, cfg.precision)).p
    roots, means, dens = dim.mlema_checks(params, cfg.K, p, 0.1)
    rows = [["k", "total_length_root", "mean_gap_power", "large_gap_density"]]
    rows += [[k, repr(a), repr(b), repr(c)]
             for k, (a, b, c) in enumerate(zip(roots, means, dens), start=1)]
    doc = {"p": p, "eps": 0.1, "K": cfg.K, "total_length_root": roots,
           "mean_gap_power": means, "large_gap_density": dens}
    _write_json(out, "report.json", doc)
    _write_csv(out, "mlema.csv", rows)
    print(f"k={cfg.K}: (N_k d_k)^(1/k) = {roots[-1]:.6f}, mean e^p = {means[-1]:.6f}, "
          f"density = {dens[-1]:.6f}")
    return doc


def cmd_minimality(cfg: ExperimentConfig, out: Path) -> dict:
    params = cfg.param_spec(cfg.depth)
    f = cfg.qsmap()
    scales = None if cfg.scales == "construction" else cfg.scale_list(params)
    summary = ms.minimality_experiment(
        params, f, cfg.depth, precision=cfg.precision, d_fraction=cfg.d_fraction,
        scales=scales, windows=cfg.samples, seed=cfg.seed, C_cap=cfg.C_cap)
    doc = summary.to_json()
    _write_json(out, "report.json", doc)
    _write_csv(out, "loglog.csv", _loglog_rows(summary.box))
    (out / "plot.svg").write_text(loglog_svg(summary.box.loglog(), summary.box.slope,
                                             summary.box.intercept, "image box count"))
    print(f"image box-dim {summary.box.slope:.4f} (rms {summary.box.residual:.3f}); "
          f"certified d = {summary.certified_d}; (prod r)^(1/k) >= {summary.r_growth:.4f}")
    for flag in summary.flags:
        print(f"flag: {flag}")
    return doc


HANDLERS = {
    "validate": cmd_validate, "build": cmd_build, "dim": cmd_dim, "boxdim": cmd_boxdim,
    "qs-estimate": cmd_qs_estimate, "distortion": cmd_distortion, "measure": cmd_measure,
    "mlema": cmd_mlema, "minimality": cmd_minimality,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsmin", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="experiment config JSON")
    parser.add_argument("--depth", type=int)
    parser.add_argument("--precision", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory (overrides config 'output')")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config, depth=args.depth,
                                    precision=args.precision, seed=args.seed,
                                    output=args.out)
        HANDLERS[args.command](cfg, Path(cfg.output))
    except QsMinimalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except TypeError as exc:
        # malformed config values reaching dataclass construction
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
