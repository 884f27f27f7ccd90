"""Mass distributions on quasisymmetric images and Frostman certificates.

Mass is split from each image interval J to its children J_1..J_n in
proportion to |J_i|^d.  Along a chain J_k in J_{k-1} in ... in [0, 1] this
gives

    mu(J_k) / |J_k|^d = 1 / prod_{i<k} r_i,   r_i = sum_children |.|^d / |J_i|^d

so growth of the r-products certifies mu(J) <= C |J|^d on construction
intervals, and the mass distribution principle then bounds the Hausdorff
dimension of the image from below by d.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .construction import DEFAULT_CAP, ParamSpec, build_levels, count, delta
from .dimension import (
    BoxCountReport,
    IntervalArray,
    box_dim_estimate,
    construction_scales,
    hausdorff_formula_estimate,
    image_levelset,
)
from .errors import ChainError, DegenerateError, PrecisionError, RangeError
from .numerics import (
    DEFAULT_PRECISION,
    log_rational,
    real_array,
    resolution,
    rpow,
    to_real,
    uses_float,
    working_precision,
)
from .qsmaps import QsMap, estimate_M, pq_exponents


def choose_d(q: float, fraction: float = 0.5) -> float:
    """Point ``fraction`` of the way across the admissible exponent range.

    The range is (0, 1) when q == 1 and (1/q, 1) when q > 1.
    """
    if q < 1:
        raise RangeError(f"q must be >= 1, got {q}")
    if not 0 < fraction < 1:
        raise RangeError(f"fraction must lie in (0, 1), got {fraction}")
    lower = 0.0 if q == 1 else 1.0 / q
    return lower + fraction * (1.0 - lower)


def elementary_bound_range(m: int) -> float:
    """Right end of the x-range where 1 - m x >= (1 - x)^(m+1)."""
    return 1.0 - (m / (m + 1)) ** (1.0 / m)


@dataclass(frozen=True)
class ProofConstants:
    N: int
    a: float
    M: float
    p: float
    q: float
    d: float
    A: float
    alpha2: float


def proof_constants(params: ParamSpec, depth: int, M: float, d: float) -> ProofConstants:
    N = 1 + params.max_branching(depth)
    a = 1.0 - ((4 * N + 4) / (4 * N + 5)) ** (1.0 / (4 * N + 4))
    pq = pq_exponents(M)
    A = (1 + pq.M) ** -2 / (2 * N) ** pq.q
    return ProofConstants(N, a, pq.M, pq.p, pq.q, d, A, (1 + A) ** (1 - d))


@dataclass(frozen=True)
class SkpResult:
    members: tuple
    k: int

    @property
    def density(self) -> float:
        return len(self.members) / self.k if self.k else 0.0


def skp_set(params: ParamSpec, p: float, k: int, a: float,
            level_lengths: Sequence | None = None) -> SkpResult:
    """Indices i <= k with e_i^p <= min(a, |I_i|^p).

    By default |I_i| is the relative length c_i of a level-i interval inside
    its parent; pass ``level_lengths`` (index i-1 -> length) to use another
    reading, e.g. the absolute lengths delta_i.
    """
    if k < 0:
        raise RangeError("k must be >= 0")
    members = []
    for i in range(1, k + 1):
        rule = params.level(i)
        length = rule.c if level_lengths is None else level_lengths[i - 1]
        ep = float(rule.e_max) ** p
        if ep <= min(a, float(length) ** p):
            members.append(i)
    return SkpResult(tuple(members), k)


# ---------------------------------------------------------------------------
# image towers and measures


@dataclass
class ImageTower:
    """Images of the level sets 0..depth under one map."""

    qsmap: QsMap
    params: ParamSpec
    levels: list          # IntervalArray per level
    branching: tuple      # n_1..n_depth
    precision: int

    @property
    def depth(self) -> int:
        return len(self.levels) - 1


def build_image_tower(params: ParamSpec, f: QsMap, depth: int,
                      precision: int = DEFAULT_PRECISION, cap: int = DEFAULT_CAP) -> ImageTower:
    levels = build_levels(params, depth, cap)
    images = [image_levelset(f, ls, precision) for ls in levels]
    branching = tuple(params.branching(k) for k in range(1, depth + 1))
    return ImageTower(f, params, images, branching, precision)


@dataclass
class MassDistribution:
    d: float
    masses: list          # per level, backend array indexed like the level set
    lengths: list         # per level, image lengths
    norms: list           # per level k < depth: sum of children's |.|^d for each interval
    tower: ImageTower

    @property
    def depth(self) -> int:
        return len(self.masses) - 1

    @property
    def precision(self) -> int:
        return self.tower.precision

    def index(self, address: Sequence[int]) -> int:
        if len(address) > self.depth:
            raise ChainError(f"address {address} deeper than measure depth {self.depth}")
        idx = 0
        for i, n in zip(address, self.tower.branching):
            if not 1 <= i <= n:
                raise ChainError(f"address digit {i} outside 1..{n}")
            idx = idx * n + (i - 1)
        return idx

    def mass(self, address: Sequence[int]):
        return self.masses[len(address)][self.index(address)]


def build_measure(tower: ImageTower, d: float) -> MassDistribution:
    """Split mass from parents to children in proportion to |child|^d."""
    if not 0 < d < 1:
        raise RangeError(f"d must lie in (0, 1), got {d}")
    prec = tower.precision
    with working_precision(prec):
        dd = to_real(d, prec)
        one = to_real(1, prec)
        lengths = [lv.lengths for lv in tower.levels]
        if any(min(L) <= 0 for L in lengths):
            raise DegenerateError("an image interval has zero length")
        powered = [rpow(L, dd, prec) for L in lengths]
        masses = [np.array([one], dtype=powered[0].dtype)]
        norms = []
        for k, n in enumerate(tower.branching, start=1):
            w = powered[k].reshape(-1, n)
            norm = w.sum(axis=1)
            norms.append(norm)
            masses.append((w * (masses[-1] / norm)[:, None]).reshape(-1))
    return MassDistribution(d, masses, lengths, norms, tower)


# ---------------------------------------------------------------------------
# chains


@dataclass
class RProductReport:
    chain: tuple
    r: list
    products: list
    identity_residual: float
    xi: float
    zeta: float
    skp: SkpResult

    @property
    def k(self) -> int:
        return len(self.chain)

    @property
    def growth(self) -> float:
        """(prod r)^(1/k)."""
        return float(self.products[-1]) ** (1.0 / self.k) if self.k else 1.0

    @property
    def bound_holds(self) -> bool:
        return float(self.products[-1]) >= self.xi * self.zeta

    @property
    def xi_zeta_margin(self) -> float:
        """log(prod r) - log(xi * zeta); nonnegative when the lower bound holds."""
        return math.log(float(self.products[-1])) - math.log(self.xi * self.zeta)


def xi_zeta(params: ParamSpec, consts: ProofConstants, k: int, skp: SkpResult) -> tuple:
    """Lower-bound factors (xi_k, zeta_k) for the r-product along any level-k chain."""
    d, q, N = consts.d, consts.q, consts.N
    s = len(skp.members)
    total = float(log_rational(Fraction(count(params, k)) * delta(params, k))) if k else 0.0
    log_xi = s * math.log(consts.alpha2) - 2 * d * math.log(1 + consts.M) * (k - s)
    if q == 1:
        log_xi += total
    else:
        log_xi += d * q * total + (1 - d * q) * math.log(N) * (k - s)
    log_zeta = 0.0
    for i in skp.members:
        rule = params.level(i)
        log_zeta += (4 * rule.n + 4) * d * math.log1p(-float(rule.e_max) ** consts.p)
    return math.exp(log_xi), math.exp(log_zeta)


def r_products(measure: MassDistribution, chain: Sequence[int],
               consts: ProofConstants | None = None) -> RProductReport:
    """Ratios r_0..r_{k-1} along a root-to-level-k chain, with the proof's lower bound."""
    chain = tuple(chain)
    k = len(chain)
    measure.index(chain)
    prec = measure.precision
    with working_precision(prec):
        dd = to_real(measure.d, prec)
        r, products = [], []
        run = to_real(1, prec)
        idx = 0
        for level in range(k):
            r_i = measure.norms[level][idx] / measure.lengths[level][idx] ** dd
            r.append(r_i)
            run = run * r_i
            products.append(run)
            idx = idx * measure.tower.branching[level] + (chain[level] - 1)
        ratio = measure.masses[k][idx] / measure.lengths[k][idx] ** dd
        residual = float(abs(ratio * run - 1))
    if consts is None:
        M = estimate_M(measure.tower.qsmap, 14, min(prec, 30))
        consts = proof_constants(measure.tower.params, max(k, 1), M, measure.d)
    skp = skp_set(measure.tower.params, consts.p, k, consts.a)
    xi, zeta = xi_zeta(measure.tower.params, consts, k, skp)
    return RProductReport(chain, r, products, residual, xi, zeta, skp)


def sample_chains(measure: MassDistribution, count_: int, seed: int = 0,
                  depth: int | None = None) -> list:
    """Leftmost, rightmost and ``count_`` seeded random root-to-leaf chains."""
    depth = measure.depth if depth is None else depth
    ns = measure.tower.branching[:depth]
    rng = np.random.default_rng(seed)
    chains = [tuple(1 for _ in ns), tuple(ns)]
    for _ in range(count_):
        chains.append(tuple(int(rng.integers(1, n + 1)) for n in ns))
    return chains


# ---------------------------------------------------------------------------
# Frostman checks


@dataclass
class FrostmanReport:
    d: float
    C_empirical: float
    C_cap: float
    intervals_tested: int
    profile: list = field(default_factory=list)   # (level, sup ratio) for construction intervals

    @property
    def growing(self) -> bool:
        """Sup ratio still reaching new highs in the deepest third of levels."""
        if len(self.profile) < 3:
            return False
        cut = len(self.profile) - max(1, len(self.profile) // 3)
        early = max(v for _, v in self.profile[:cut])
        late = max(v for _, v in self.profile[cut:])
        return late > early * (1 + 1e-9)

    @property
    def passed(self) -> bool:
        return self.C_empirical <= self.C_cap and not self.growing

    def to_json(self) -> dict:
        return {"d": self.d, "C_empirical": self.C_empirical, "C_cap": self.C_cap,
                "intervals_tested": self.intervals_tested, "growing": self.growing,
                "pass": self.passed, "profile": [[k, v] for k, v in self.profile]}


def window_mass(measure: MassDistribution, lo, hi, prefix=None):
    """Upper bound for mu([lo, hi]): deepest intervals meeting it are counted whole."""
    deep = measure.tower.levels[-1]
    if prefix is None:
        prefix = _prefix(measure)
    first = int(np.searchsorted(deep.rights, lo, side="right"))
    last = int(np.searchsorted(deep.lefts, hi, side="left"))
    if last <= first:
        return prefix[0] * 0
    return prefix[last] - prefix[first]


def _prefix(measure: MassDistribution):
    deep = measure.masses[-1]
    out = np.empty(len(deep) + 1, dtype=deep.dtype)
    out[0] = deep[0] * 0
    out[1:] = np.cumsum(deep)
    return out


def frostman_check(measure: MassDistribution, d: float | None = None,
                   test_intervals: Sequence | None = None, C_cap: float = 10.0) -> FrostmanReport:
    """sup mu(J)/|J|^d over test intervals.

    Without ``test_intervals`` every image fundamental interval of levels
    1..depth is tested and a per-level profile is kept; otherwise each
    ``(lo, hi)`` window is bounded with ``window_mass``.
    """
    d = measure.d if d is None else d
    prec = measure.precision
    with working_precision(prec):
        dd = to_real(d, prec)
        if test_intervals is None:
            profile, best, tested = [], 0.0, 0
            for k in range(1, measure.depth + 1):
                ratios = measure.masses[k] / rpow(measure.lengths[k], dd, prec)
                top = float(max(ratios))
                profile.append((k, top))
                best = max(best, top)
                tested += len(ratios)
            return FrostmanReport(float(d), best, C_cap, tested, profile)
        prefix = _prefix(measure)
        best = 0.0
        for lo, hi in test_intervals:
            lo, hi = to_real(lo, prec), to_real(hi, prec)
            if hi <= lo:
                raise DegenerateError(f"zero-length test interval [{lo}, {hi}]")
            best = max(best, float(window_mass(measure, lo, hi, prefix) / (hi - lo) ** dd))
        return FrostmanReport(float(d), best, C_cap, len(test_intervals))


@dataclass
class Step2Report:
    seed: int
    windows_tested: int
    max_components: int
    component_bound: int
    C_window: float
    K_empirical: float
    counts: list = field(repr=False, default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_components <= self.component_bound

    def to_json(self) -> dict:
        return {"seed": self.seed, "windows_tested": self.windows_tested,
                "max_components": self.max_components,
                "component_bound": self.component_bound, "C_window": self.C_window,
                "K_empirical": self.K_empirical, "pass": self.passed}


def step2_window_check(measure: MassDistribution, d: float | None, f: QsMap,
                       samples: int = 1000, seed: int = 0) -> Step2Report:
    """Random windows J: count level-k image components meeting J.

    k is chosen so that delta_k <= |f^-1(J)| <= delta_{k-1}; preimage lengths
    are drawn log-uniformly from [delta_depth, 1] so k never exceeds the
    measure depth.
    """
    if measure.depth < 2:
        raise RangeError("measure depth must be >= 2")
    d = measure.d if d is None else d
    params = measure.tower.params
    prec = measure.precision
    deltas = [float(delta(params, k)) for k in range(measure.depth + 1)]
    bound = 2 * (1 + max(measure.tower.branching))
    inv = f.inverse()
    rng = np.random.default_rng(seed)
    prefix = _prefix(measure)
    counts, best_c, best_k = [], 0.0, 0.0
    tol = max(resolution(prec), 1e-12) * 1e3
    with working_precision(prec):
        dd = to_real(d, prec)
        for _ in range(samples):
            length = math.exp(rng.uniform(math.log(deltas[-1]), 0.0))
            x0 = rng.uniform(0.0, 1.0 - length)
            pre = f.eval_many(real_array([Fraction(x0), Fraction(x0 + length)], prec), prec)
            lo, hi = pre[0], pre[1]
            back = inv.eval_many(np.array([lo, hi], dtype=pre.dtype), prec)
            if abs(float(back[0]) - x0) > tol or abs(float(back[1]) - x0 - length) > tol:
                raise PrecisionError("inverse map does not reproduce the window preimage")
            span = float(back[1] - back[0])
            k = min((j for j in range(1, measure.depth + 1) if deltas[j] <= span * (1 + 1e-12)),
                    default=measure.depth)
            level = measure.tower.levels[k]
            first = int(np.searchsorted(level.rights, lo, side="right"))
            last = int(np.searchsorted(level.lefts, hi, side="left"))
            n_meet = max(0, last - first)
            counts.append(n_meet)
            width = hi - lo
            if n_meet:
                best_k = max(best_k, float(max(level.lengths[first:last]) / width))
            ratio = window_mass(measure, lo, hi, prefix) / width ** dd
            best_c = max(best_c, float(ratio))
    return Step2Report(seed, samples, max(counts), bound, best_c, best_k, counts)


# ---------------------------------------------------------------------------
# end-to-end experiment

D_FRACTIONS = (0.5, 0.75, 0.9, 0.95, 0.99)


@dataclass
class MinimalitySummary:
    map_json: object
    depth: int
    formula_estimate: float
    hypothesis_met: bool
    flags: list
    box: BoxCountReport
    box_all_scales: BoxCountReport
    M_hat: float
    p: float
    q: float
    d_default: float
    certified_d: float | None
    frostman: list
    r_growth: float
    alpha2: float
    bound_holds: bool
    xi_zeta_margin: float
    step2: Step2Report

    def to_json(self) -> dict:
        return {
            "map": self.map_json,
            "depth": self.depth,
            "formula_estimate": self.formula_estimate,
            "hypothesis_met": self.hypothesis_met,
            "flags": list(self.flags),
            "box_dim": self.box.slope,
            "box_residual": self.box.residual,
            "box": self.box.to_json(),
            "box_all_scales": self.box_all_scales.to_json(),
            "M_hat": self.M_hat,
            "p": self.p,
            "q": self.q,
            "d": self.d_default,
            "certified_d": self.certified_d,
            "frostman": [r.to_json() for r in self.frostman],
            "r_growth": self.r_growth,
            "alpha2": self.alpha2,
            "xi_zeta_bound_holds": self.bound_holds,
            "xi_zeta_margin": self.xi_zeta_margin,
            "step2": self.step2.to_json(),
        }


def minimality_experiment(params: ParamSpec, f: QsMap, depth: int, *,
                          precision: int = 15, d_fraction: float = 0.5,
                          d_fractions: Sequence[float] = D_FRACTIONS,
                          scales: Sequence | None = None, skip_coarse: int | None = None,
                          M_depth: int = 14, chains: int = 32, windows: int = 1000,
                          seed: int = 0, C_cap: float = 10.0,
                          hypothesis_tol: float = 0.1) -> MinimalitySummary:
    """Image dimension, measure certificates and r-product growth for one map.

    Box counting defaults to the construction scales delta_j with the
    coarsest ``skip_coarse`` (default depth // 4) dropped.
    """
    if depth < 2:
        raise RangeError("depth must be >= 2")
    flags = []
    formula = hausdorff_formula_estimate(params, K=depth, window=max(1, depth // 3))
    hypothesis_met = formula.estimate >= 1 - hypothesis_tol
    if not hypothesis_met:
        flags.append(f"hypothesis dim_H E = 1 not met (formula estimate "
                     f"{formula.estimate:.4f})")

    tower = build_image_tower(params, f, depth, precision)
    deepest = tower.levels[-1]
    all_scales = construction_scales(params, depth)
    if scales is None:
        skip = depth // 4 if skip_coarse is None else skip_coarse
        scales = all_scales[skip:]
    box = box_dim_estimate(deepest, scales)
    box_all = box_dim_estimate(deepest, all_scales)

    M_hat = estimate_M(f, M_depth, min(precision, 30) if precision > 15 else precision)
    pq = pq_exponents(M_hat)
    d0 = choose_d(pq.q, d_fraction)

    reports, certified = [], None
    for frac in sorted(set(d_fractions) | {d_fraction}):
        d = choose_d(pq.q, frac)
        mu = build_measure(tower, d)
        rep = frostman_check(mu, C_cap=C_cap)
        reports.append(rep)
        if rep.passed:
            certified = d if certified is None else max(certified, d)
        if frac == d_fraction:
            mu0 = mu
    step2 = step2_window_check(mu0, d0, f, samples=windows, seed=seed)
    if not step2.passed:
        flags.append("step-2 component bound violated")
        certified = None

    consts = proof_constants(params, depth, M_hat, d0)
    chain_reports = [r_products(mu0, c, consts) for c in sample_chains(mu0, chains, seed)]
    growth = min(r.growth for r in chain_reports)
    holds = all(r.bound_holds for r in chain_reports)
    margin = min(r.xi_zeta_margin for r in chain_reports)

    return MinimalitySummary(f.to_json(), depth, formula.estimate, hypothesis_met, flags,
                             box, box_all, M_hat, pq.p, pq.q, d0, certified, reports,
                             growth, consts.alpha2, holds, margin, step2)
