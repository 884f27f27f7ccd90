"""Quasisymmetric self-maps of [0, 1].

The catalog holds the identity, powers x**alpha, increasing piecewise-linear
maps and left-to-right compositions.  Every entry fixes 0 and 1 and has an
inverse that is again a catalog entry.

A map is M-quasisymmetric when adjacent equal-length intervals have image
lengths within a factor M of each other; ``estimate_M`` measures that
factor on dyadic grids.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .errors import ConfigError, DomainError, GeometryError, PrecisionError, RangeError
from .numerics import (
    DEFAULT_PRECISION,
    format_rational,
    parse_rational,
    real_array,
    resolution,
    rpow,
    to_real,
    uses_float,
    working_precision,
)


class QsMap:
    """Base class; subclasses implement ``_apply`` on backend arrays."""

    kind = "abstract"

    def evaluate(self, x, precision: int = DEFAULT_PRECISION):
        return evaluate(self, x, precision)

    def eval_many(self, xs, precision: int = DEFAULT_PRECISION) -> np.ndarray:
        """Evaluate on a sequence of points in [0, 1]; returns a backend array."""
        with working_precision(precision):
            arr = xs if isinstance(xs, np.ndarray) else real_array(list(xs), precision)
            if len(arr) and (min(arr) < 0 or max(arr) > 1):
                raise DomainError("points must lie in [0, 1]")
            return self._apply(arr, precision)

    def _apply(self, arr: np.ndarray, precision: int) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "QsMap":
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Identity(QsMap):
    kind = "identity"

    def _apply(self, arr, precision):
        return arr.copy()

    def inverse(self):
        return self

    def to_json(self):
        return {"kind": "identity"}


@dataclass(frozen=True)
class Power(QsMap):
    """x -> x**alpha for a positive rational alpha."""

    alpha: Fraction
    kind = "power"

    def __post_init__(self):
        object.__setattr__(self, "alpha", parse_rational(self.alpha))
        if self.alpha <= 0:
            raise RangeError(f"power exponent must be positive, got {self.alpha}")

    def _apply(self, arr, precision):
        if self.alpha == 1:
            return arr.copy()
        return rpow(arr, self.alpha, precision)

    def inverse(self):
        return Power(1 / self.alpha)

    def to_json(self):
        return {"kind": "power", "alpha": format_rational(self.alpha)}


@dataclass(frozen=True)
class PiecewiseLinear(QsMap):
    """Increasing continuous map, linear between ``breakpoints``.

    ``slopes`` has one more entry than ``breakpoints``; the segments must rise
    by exactly 1 in total so that f(1) = 1.
    """

    breakpoints: tuple
    slopes: tuple
    knots: tuple = field(init=False, repr=False, compare=False)
    values: tuple = field(init=False, repr=False, compare=False)
    kind = "piecewise_linear"

    def __post_init__(self):
        bps = tuple(parse_rational(b) for b in self.breakpoints)
        slopes = tuple(parse_rational(s) for s in self.slopes)
        if len(slopes) != len(bps) + 1:
            raise ConfigError("need exactly one more slope than breakpoints")
        if any(s <= 0 for s in slopes):
            raise RangeError("slopes must be positive")
        knots = (Fraction(0),) + bps + (Fraction(1),)
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise RangeError("breakpoints must increase strictly inside (0, 1)")
        values = [Fraction(0)]
        for s, a, b in zip(slopes, knots, knots[1:]):
            values.append(values[-1] + s * (b - a))
        if values[-1] != 1:
            raise RangeError(f"segments rise by {values[-1]}, must rise by exactly 1")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", tuple(values))

    def exact(self, x: Fraction) -> Fraction:
        i = min(bisect.bisect_right(self.knots, x) - 1, len(self.slopes) - 1)
        return self.values[i] + self.slopes[i] * (x - self.knots[i])

    def _apply(self, arr, precision):
        if uses_float(precision):
            return np.interp(arr, [float(k) for k in self.knots],
                             [float(v) for v in self.values])
        knots = [to_real(k, precision) for k in self.knots]
        values = [to_real(v, precision) for v in self.values]
        slopes = [to_real(s, precision) for s in self.slopes]
        last = len(slopes) - 1
        out = np.empty(len(arr), dtype=object)
        for j, x in enumerate(arr):
            i = min(bisect.bisect_right(knots, x) - 1, last)
            out[j] = values[i] + slopes[i] * (x - knots[i])
        return out

    def inverse(self):
        return PiecewiseLinear(self.values[1:-1], tuple(1 / s for s in self.slopes))

    def to_json(self):
        return {
            "kind": "piecewise_linear",
            "breakpoints": [format_rational(b) for b in self.breakpoints],
            "slopes": [format_rational(s) for s in self.slopes],
        }


@dataclass(frozen=True)
class Composition(QsMap):
    """Apply ``maps`` left to right: maps[0] first."""

    maps: tuple
    kind = "composition"

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ConfigError("composition of zero maps")
        object.__setattr__(self, "maps", maps)

    def _apply(self, arr, precision):
        for m in self.maps:
            arr = m._apply(arr, precision)
        return arr

    def inverse(self):
        return Composition(tuple(m.inverse() for m in reversed(self.maps)))

    def to_json(self):
        return [m.to_json() for m in self.maps]


def map_from_json(doc) -> QsMap:
    """Decode the tagged-union JSON form; a list is a composition."""
    if isinstance(doc, list):
        return Composition(tuple(map_from_json(d) for d in doc))
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError(f"not a map document: {doc!r}")
    kind = doc["kind"]
    if kind == "identity":
        return Identity()
    if kind == "power":
        return Power(parse_rational(doc["alpha"]))
    if kind == "piecewise_linear":
        return PiecewiseLinear(tuple(doc["breakpoints"]), tuple(doc["slopes"]))
    if kind == "composition":
        return Composition(tuple(map_from_json(d) for d in doc["maps"]))
    raise ConfigError(f"unknown map kind {kind!r}")


# ---------------------------------------------------------------------------


def _check_point(x):
    if isinstance(x, str):
        x = parse_rational(x)
    if x < 0 or x > 1:
        raise DomainError(f"{x} lies outside [0, 1]")
    return x


def evaluate(f: QsMap, x, precision: int = DEFAULT_PRECISION):
    """f(x) to within 10**-precision (a float for precision <= 15, else an mpf)."""
    x = _check_point(x)
    with working_precision(precision):
        return f._apply(real_array([x], precision), precision)[0]


def image_interval(f: QsMap, interval, precision: int = DEFAULT_PRECISION) -> tuple:
    a, b = (_check_point(v) for v in interval)
    if b < a:
        raise DomainError(f"reversed interval [{a}, {b}]")
    fa, fb = f.eval_many([a, b], precision)
    return fa, fb


def _dyadic_grid(depth: int, precision: int) -> np.ndarray:
    size = 2**depth
    if uses_float(precision):
        return np.arange(size + 1, dtype=np.float64) / size
    out = np.empty(size + 1, dtype=object)
    for i in range(size + 1):
        out[i] = mpmath.ldexp(i, -depth)
    return out


def estimate_M(f: QsMap, depth: int, precision: int = DEFAULT_PRECISION) -> float:
    """Largest image-length ratio over adjacent dyadic pairs at scales 2^-1..2^-depth."""
    if depth < 1:
        raise RangeError("depth must be >= 1")
    with working_precision(precision):
        ys = f.eval_many(_dyadic_grid(depth, precision), precision)
        tol = resolution(precision)
        best = 1.0
        for j in range(1, depth + 1):
            step = 2 ** (depth - j)
            pts = ys[::step]
            lengths = pts[1:] - pts[:-1]
            if min(lengths) <= tol:
                raise PrecisionError(
                    f"image lengths at scale 2^-{j} are indistinguishable at "
                    f"{precision} digits")
            if len(lengths) < 2:
                continue
            q = lengths[1:] / lengths[:-1]
            best = max(best, float(max(q)), float(max(1 / q)))
    return best


@dataclass(frozen=True)
class PqExponents:
    M: float
    p: float
    q: float


def pq_exponents(M, precision: int = DEFAULT_PRECISION) -> PqExponents:
    """p = log2(1 + 1/M), q = log2(1 + M)."""
    if M < 1:
        raise RangeError(f"quasisymmetry constant must be >= 1, got {M}")
    with mpmath.workdps(max(precision, 15) + 10):
        m = mpmath.mpf(M) if not isinstance(M, Fraction) else \
            mpmath.mpf(M.numerator) / M.denominator
        p = mpmath.log(1 + 1 / m, 2)
        q = mpmath.log(1 + m, 2)
        return PqExponents(float(m), float(p), float(q))


@dataclass
class DistortionRow:
    J: tuple
    I: tuple
    ratio: float
    lower: float
    upper: float
    passed: bool

    @property
    def slack_lower(self) -> float:
        return self.ratio - self.lower

    @property
    def slack_upper(self) -> float:
        return self.upper - self.ratio


@dataclass
class DistortionReport:
    M: float
    p: float
    q: float
    rows: list

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def failures(self) -> int:
        return sum(not r.passed for r in self.rows)


def distortion_check(f: QsMap, M, pairs: Sequence, precision: int = DEFAULT_PRECISION,
                     rtol: float | None = None) -> DistortionReport:
    """Test (1+M)^-2 (|J|/|I|)^q <= |f(J)|/|f(I)| <= 4 (|J|/|I|)^p on nested pairs.

    ``pairs`` holds ``(J, I)`` with ``J`` inside ``I``; each interval is an
    ``(a, b)`` pair of numbers in [0, 1].
    """
    exps = pq_exponents(M, precision)
    rtol = resolution(precision) * 16 if rtol is None else rtol
    points = []
    for J, I in pairs:
        (ja, jb), (ia, ib) = J, I
        for v in (ja, jb, ia, ib):
            _check_point(v)
        if not (ia <= ja <= jb <= ib):
            raise GeometryError(f"{J} is not contained in {I}")
        if ib <= ia:
            raise GeometryError(f"outer interval {I} has zero length")
        points.extend((ja, jb, ia, ib))
    rows = []
    with working_precision(precision):
        xs = real_array(points, precision)
        ys = f._apply(xs, precision)
        one = to_real(1, precision)
        m = to_real(exps.M, precision)
        for idx, (J, I) in enumerate(pairs):
            x = xs[4 * idx: 4 * idx + 4]
            y = ys[4 * idx: 4 * idx + 4]
            outer = y[3] - y[2]
            if outer <= 0:
                raise PrecisionError(f"image of {I} has no measurable length")
            ratio = (y[1] - y[0]) / outer
            rel = (x[1] - x[0]) / (x[3] - x[2])
            lower = (one + m) ** -2 * rel ** to_real(exps.q, precision)
            upper = 4 * rel ** to_real(exps.p, precision)
            ok = lower * (1 - rtol) <= ratio <= upper * (1 + rtol)
            rows.append(DistortionRow(tuple(J), tuple(I), float(ratio), float(lower),
                                      float(upper), bool(ok)))
    return DistortionReport(exps.M, exps.p, exps.q, rows)


def dyadic_pair_battery(depth: int) -> list:
    """Nested pairs (J, I): every dyadic child/grandchild of dyadic intervals down to ``depth``."""
    pairs = []
    for j in range(depth):
        h = Fraction(1, 2**j)
        for i in range(2**j):
            I = (i * h, (i + 1) * h)
            for sub in range(1, min(3, depth - j) + 1):
                g = h / 2**sub
                for t in (0, 2**sub - 1):
                    pairs.append(((I[0] + t * g, I[0] + (t + 1) * g), I))
    return pairs


def random_nested_pairs(count: int, seed: int = 0) -> list:
    """Seeded nested pairs with log-uniform relative sizes down to 1e-6."""
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(count):
        size_i = 10 ** rng.uniform(-6, 0)
        ia = rng.uniform(0, 1 - size_i)
        size_j = size_i * 10 ** rng.uniform(-6, 0)
        ja = ia + rng.uniform(0, size_i - size_j)
        I = (Fraction(ia), min(Fraction(ia + size_i), Fraction(1)))
        J = (Fraction(ja), min(Fraction(ja + size_j), I[1]))
        pairs.append((J, I))
    return pairs
