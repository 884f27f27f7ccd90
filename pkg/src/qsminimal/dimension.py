"""Dimension of homogeneous perfect sets and their images.

The closed-form Hausdorff dimension is a liminf over k of

    log N_k / -log( sum_{l=1}^{n_{k+1}-1} eta_{k+1,l} + n_{k+1} delta_{k+1} )

which is approximated here by the minimum over a trailing window.  Images of
level sets under quasisymmetric maps are only available numerically, so
they are measured by box counting with exact greedy covers.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .construction import LevelSet, ParamSpec, count, delta, gap_lengths
from .errors import DegenerateError, PrecisionError, RangeError
from .numerics import (
    DEFAULT_PRECISION,
    format_rational,
    log_rational,
    ratio_array,
    resolution,
    uses_float,
    working_precision,
)
from .qsmaps import QsMap


# ---------------------------------------------------------------------------
# formula


def _denominator_argument(params: ParamSpec, k: int, end_gaps: bool = False) -> Fraction:
    etas = gap_lengths(params, k + 1)
    inner = etas if end_gaps else etas[1:-1]
    return sum(inner, Fraction(0)) + params.branching(k + 1) * delta(params, k + 1)


def hausdorff_formula_partial(params: ParamSpec, k: int,
                              precision: int = DEFAULT_PRECISION,
                              end_gaps: bool = False) -> float:
    """k-th quotient of the dimension formula (interior gaps only, as printed).

    ``end_gaps=True`` adds the two end gaps, giving log N_k / -log delta_k.
    """
    if k < 1:
        raise RangeError(f"partials start at k = 1, got {k}")
    arg = _denominator_argument(params, k, end_gaps)
    if not 0 < arg < 1:
        raise DegenerateError(f"k={k}: denominator argument {arg} outside (0, 1)")
    num = log_rational(Fraction(count(params, k)), precision)
    return float(num / -log_rational(arg, precision))


@dataclass
class DimensionReport:
    partials: list            # (k, value)
    estimate: float           # trailing-window minimum, clamped to [0, 1]
    raw_estimate: float
    window: tuple             # (first k, last k)
    partials_end_gaps: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "raw_estimate": self.raw_estimate,
            "window": list(self.window),
            "partials": [[k, v] for k, v in self.partials],
            "partials_with_end_gaps": [[k, v] for k, v in self.partials_end_gaps],
        }

    def csv_rows(self) -> list:
        header = ["k", "numerator", "denominator_argument", "partial_value",
                  "denominator_argument_with_end_gaps", "partial_value_with_end_gaps"]
        return [header] + self.rows


def hausdorff_formula_estimate(params: ParamSpec, K: int = 30, window: int = 10,
                               precision: int = DEFAULT_PRECISION) -> DimensionReport:
    if not 1 <= window <= K:
        raise RangeError(f"need 1 <= window <= K, got window={window}, K={K}")
    partials, partials_end, rows = [], [], []
    for k in range(1, K + 1):
        try:
            value = hausdorff_formula_partial(params, k, precision)
        except DegenerateError as exc:
            raise DegenerateError(f"k={k}: {exc}") from exc
        value_end = hausdorff_formula_partial(params, k, precision, end_gaps=True)
        partials.append((k, value))
        partials_end.append((k, value_end))
        rows.append([k, count(params, k),
                     format_rational(_denominator_argument(params, k)), repr(value),
                     format_rational(_denominator_argument(params, k, True)),
                     repr(value_end)])
    raw = min(v for k, v in partials[K - window:])
    return DimensionReport(partials, min(max(raw, 0.0), 1.0), raw, (K - window + 1, K),
                           partials_end, rows)


def mlema_checks(params: ParamSpec, K: int, p: float, eps: float) -> tuple:
    """Finite prefixes of the three sequences that tend to 1, 0, 0 for dimension-one sets.

    Returns ``(total_length_root, mean_gap_power, large_gap_density)`` where,
    with e_i the largest relative gap at level i,

    * total_length_root[k-1] = (N_k delta_k)^(1/k)
    * mean_gap_power[k-1]   = (1/k) sum_{i<=k} e_i^p
    * large_gap_density[k-1] = #{i <= k : e_i >= eps} / k
    """
    if K < 1:
        raise RangeError("K must be >= 1")
    if not 0 < p <= 1:
        raise RangeError(f"p must lie in (0, 1], got {p}")
    if not 0 < eps < 1:
        raise RangeError(f"eps must lie in (0, 1), got {eps}")
    roots, means, dens = [], [], []
    total, acc, big = Fraction(1), 0.0, 0
    for k in range(1, K + 1):
        rule = params.level(k)
        total *= rule.n * rule.c
        e = rule.e_max
        acc += float(e) ** p
        big += e >= Fraction(eps)
        roots.append(math.exp(float(log_rational(total)) / k))
        means.append(acc / k)
        dens.append(big / k)
    return roots, means, dens


# ---------------------------------------------------------------------------
# interval lists and covers


@dataclass
class IntervalArray:
    """Sorted intervals with disjoint interiors, as parallel endpoint arrays."""

    lefts: np.ndarray
    rights: np.ndarray
    precision: int | None = None   # None: exact entries

    def __len__(self):
        return len(self.lefts)

    def __iter__(self):
        return zip(self.lefts, self.rights)

    @property
    def lengths(self) -> np.ndarray:
        return self.rights - self.lefts


def image_levelset(f: QsMap, levelset: LevelSet,
                   precision: int = DEFAULT_PRECISION) -> IntervalArray:
    """Images of all fundamental intervals of one level, order preserved."""
    den, w = levelset.denominator, levelset.width
    with working_precision(precision):
        lefts = ratio_array(levelset.numerators, den, precision)
        rights = ratio_array([a + w for a in levelset.numerators], den, precision)
        both = np.concatenate([lefts, rights])
        ys = f._apply(both, precision)
        out = IntervalArray(ys[:len(lefts)], ys[len(lefts):], precision)
        _check_separated(out, precision)
    return out


def _check_separated(iv: IntervalArray, precision: int):
    lengths = iv.rights - iv.lefts
    if len(lengths) and min(lengths) <= 0:
        raise PrecisionError("an image interval collapsed to a point at working precision")
    if len(iv) > 1 and min(iv.lefts[1:] - iv.rights[:-1]) < 0:
        raise PrecisionError("adjacent image intervals overlap at working precision")


def _as_pairs(intervals):
    if isinstance(intervals, LevelSet):
        return None
    if isinstance(intervals, IntervalArray):
        return list(intervals.lefts), list(intervals.rights), intervals.precision
    lefts, rights = [], []
    for a, b in intervals:
        lefts.append(a)
        rights.append(b)
    return lefts, rights, None


def _greedy(lefts, rights, eps, tol) -> int:
    n = len(lefts)
    if n == 0:
        return 0
    covers, i = 0, 0
    start = lefts[0]
    while True:
        end = start + eps
        covers += 1
        # first interval not covered up to `end`
        i = bisect.bisect_right(rights, end + tol, lo=i)
        if i >= n:
            return covers
        if lefts[i] > end + tol:
            start = lefts[i]
            continue
        # interval i straddles `end`: march through it in whole covers
        extra = math.ceil((rights[i] - end - tol) / eps)
        covers += extra - 1
        start = end + (extra - 1) * eps


def covering_count(intervals, eps) -> int:
    """Minimal number of closed length-eps intervals covering a finite union.

    Greedy: put a cover at the leftmost uncovered point and repeat.  Exact for
    rational input; for floating input endpoints within a few ulps of a
    cover's end count as covered.
    """
    if eps <= 0:
        raise RangeError(f"eps must be positive, got {eps}")
    if isinstance(intervals, LevelSet):
        eps = Fraction(eps)
        scale = eps.denominator
        lefts = [a * scale for a in intervals.numerators]
        width = intervals.width * scale
        rights = [a + width for a in lefts]
        return _greedy(lefts, rights, eps.numerator * intervals.denominator, 0)
    lefts, rights, precision = _as_pairs(intervals)
    exact = precision is None and all(isinstance(v, (int, Fraction)) for v in lefts[:1])
    if exact:
        eps = Fraction(eps)
        tol = 0
    else:
        p = precision if precision is not None else 15
        tol = resolution(p) * 8
        if not uses_float(p):
            with working_precision(p):
                return _greedy(lefts, rights, eps, tol)
        lefts = [float(v) for v in lefts]
        rights = [float(v) for v in rights]
        eps = float(eps)
    return _greedy(lefts, rights, eps, tol)


@dataclass
class BoxCountReport:
    scales: list
    counts: list
    slope: float
    intercept: float
    residual: float

    def loglog(self) -> list:
        return [(math.log(1 / float(e)), math.log(c)) for e, c in zip(self.scales, self.counts)]

    def to_json(self) -> dict:
        return {
            "scales": [float(e) for e in self.scales],
            "counts": list(self.counts),
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
        }


def box_dim_estimate(intervals, scales: Sequence) -> BoxCountReport:
    """Least-squares slope of log count against log(1/eps)."""
    if len(scales) < 3:
        raise RangeError("need at least three scales")
    if any(e <= 0 for e in scales):
        raise RangeError("scales must be positive")
    xs = np.array([math.log(1 / float(e)) for e in scales])
    if np.ptp(xs) == 0:
        raise DegenerateError("scales are all equal; slope undefined")
    counts = [covering_count(intervals, e) for e in scales]
    ys = np.log(np.array(counts, dtype=float))
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    return BoxCountReport(list(scales), counts, float(slope), float(intercept),
                          float(np.sqrt(np.mean(resid**2))))


def construction_scales(params: ParamSpec, depth: int) -> list:
    return [delta(params, k) for k in range(1, depth + 1)]
