"""Exact construction of homogeneous perfect sets.

A set is described level by level: ``n_k`` children per parent, each child
a fraction ``c_k`` of its parent, separated by relative gaps
``e_{k,0..n_k}`` (fractions of the parent length).  At every level the
relative quantities must satisfy ``sum(e_k) + n_k * c_k == 1`` exactly.

Levels are materialised with integer numerators over a common denominator,
so every endpoint is an exact rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Mapping, Sequence

from .errors import CapacityError, ConfigError, ConsistencyError, DepthError, RangeError
from .numerics import format_rational, parse_rational

DEFAULT_CAP = 2**24
RULE_VALIDATION_DEPTH = 64


# ---------------------------------------------------------------------------
# sequence rules


def _const_branching(k, params):
    return int(params["n"])


def _const_ratio(k, params):
    return parse_rational(params["c"])


def _defect_power_ratio(k, params):
    # c_k = (1 - (k+1)^-power) / n ; total length of E_k stays bounded away from 0
    n = int(params["n"])
    power = int(params.get("power", 2))
    return (1 - Fraction(1, (k + 1) ** power)) / n


def _uniform_gaps(k, n, c, params):
    inner = (1 - n * c) / (n - 1)
    return (Fraction(0),) + (inner,) * (n - 1) + (Fraction(0),)


def _end_gaps(k, n, c, params):
    end = (1 - n * c) / 2
    return (end,) + (Fraction(0),) * (n - 1) + (end,)


BRANCHING_RULES: dict[str, Callable] = {"constant": _const_branching}
RATIO_RULES: dict[str, Callable] = {
    "constant": _const_ratio,
    "defect_power": _defect_power_ratio,
}
GAP_RULES: dict[str, Callable] = {"uniform": _uniform_gaps, "end_gaps": _end_gaps}


@dataclass(frozen=True)
class SeqSource:
    """One of the three defining sequences: an explicit prefix or a named rule."""

    values: tuple = ()
    periodic: bool = False
    rule: str | None = None
    params: tuple = ()
    offset: int = 0

    @property
    def limit(self) -> int | None:
        if self.rule is not None or self.periodic:
            return None
        return len(self.values) - self.offset

    def raw(self, k: int):
        if self.rule is not None:
            return None
        idx = k - 1 + self.offset
        if self.periodic:
            return self.values[idx % len(self.values)]
        if idx >= len(self.values):
            raise DepthError(f"level {k} beyond explicit depth {self.limit}")
        return self.values[idx]

    def shifted(self, by: int) -> "SeqSource":
        return SeqSource(self.values, self.periodic, self.rule, self.params, self.offset + by)

    def to_json(self, encode):
        if self.rule is not None:
            out = {"rule": self.rule, "params": dict(self.params)}
            if self.offset:
                out["offset"] = self.offset
            return out
        vals = self.values
        if self.offset:
            if self.periodic:
                o = self.offset % len(vals)
                vals = vals[o:] + vals[:o]
            else:
                vals = vals[self.offset:]
        return [encode(v) for v in vals]


def _value_at(src: SeqSource, rules: dict, k: int):
    if src.rule is not None:
        return rules[src.rule](k + src.offset, dict(src.params))
    return src.raw(k)


@dataclass(frozen=True)
class TailRule:
    kind: str  # "explicit-finite" | "periodic" | "named-family"
    depth: int | None = None
    period: int | None = None
    name: str | None = None


@dataclass(frozen=True)
class LevelRule:
    n: int
    c: Fraction
    e: tuple

    @property
    def e_max(self) -> Fraction:
        return max(self.e)


def _rule_params(params: Mapping | None) -> tuple:
    params = dict(params or {})
    return tuple(sorted((k, v if not isinstance(v, Fraction) else format_rational(v))
                        for k, v in params.items()))


@dataclass(frozen=True, eq=False)
class ParamSpec:
    """Sequences n_k, c_k, e_{k,l} defining a homogeneous perfect set."""

    _branching: SeqSource
    _ratio: SeqSource
    _gaps: SeqSource
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def level(self, k: int) -> LevelRule:
        if k < 1:
            raise DepthError(f"levels start at 1, got {k}")
        rule = self._cache.get(k)
        if rule is None:
            rule = self._compute_level(k)
            self._cache[k] = rule
        return rule

    def _compute_level(self, k: int) -> LevelRule:
        limit = self.depth_limit
        if limit is not None and k > limit:
            raise DepthError(f"level {k} beyond explicit depth {limit}")
        n = _value_at(self._branching, BRANCHING_RULES, k)
        c = _value_at(self._ratio, RATIO_RULES, k)
        if not isinstance(n, int) or n < 2:
            raise RangeError(f"level {k}: n_k = {n!r}, need an integer >= 2")
        if not 0 < c < 1:
            raise RangeError(f"level {k}: c_k = {c}, need 0 < c_k < 1")
        if n * c > 1:
            raise RangeError(f"level {k}: n_k*c_k = {n * c} > 1")
        kk = k + self._gaps.offset
        if self._gaps.rule is not None:
            e = GAP_RULES[self._gaps.rule](kk, n, c, dict(self._gaps.params))
        else:
            e = tuple(self._gaps.raw(k))
        if len(e) != n + 1:
            raise RangeError(f"level {k}: expected {n + 1} gaps, got {len(e)}")
        if any(x < 0 for x in e):
            raise RangeError(f"level {k}: negative relative gap in {e}")
        residual = sum(e) + n * c - 1
        if residual != 0:
            raise ConsistencyError(k, residual)
        return LevelRule(n, Fraction(c), tuple(Fraction(x) for x in e))

    # accessors mirroring the mathematical notation
    def branching(self, k: int) -> int:
        return self.level(k).n

    def ratio(self, k: int) -> Fraction:
        return self.level(k).c

    def relative_gaps(self, k: int) -> tuple:
        return self.level(k).e

    @property
    def depth_limit(self) -> int | None:
        limits = [s.limit for s in (self._branching, self._ratio, self._gaps)
                  if s.limit is not None]
        return min(limits) if limits else None

    @property
    def tail_rule(self) -> TailRule:
        limit = self.depth_limit
        if limit is not None:
            return TailRule("explicit-finite", depth=limit)
        periods = [len(s.values) for s in (self._branching, self._ratio, self._gaps)
                   if s.periodic]
        if periods:
            return TailRule("periodic", period=math.lcm(*periods))
        names = "+".join(s.rule for s in (self._branching, self._ratio, self._gaps))
        return TailRule("named-family", name=names)

    def validate(self, depth: int | None = None) -> int:
        """Check every level up to ``depth``; returns the depth checked."""
        if depth is None:
            tail = self.tail_rule
            depth = tail.depth or tail.period or RULE_VALIDATION_DEPTH
        for k in range(1, depth + 1):
            self.level(k)
        return depth

    def max_branching(self, depth: int) -> int:
        return max(self.branching(k) for k in range(1, depth + 1))

    def shifted(self, by: int) -> "ParamSpec":
        """Parameters of the sub-construction inside any level-``by`` interval."""
        return ParamSpec(self._branching.shifted(by), self._ratio.shifted(by),
                         self._gaps.shifted(by))

    def to_json(self) -> dict:
        return {
            "branching": self._branching.to_json(int),
            "ratio": self._ratio.to_json(format_rational),
            "gaps": self._gaps.to_json(lambda row: [format_rational(x) for x in row]),
            "tail": "periodic" if any(s.periodic for s in
                                      (self._branching, self._ratio, self._gaps))
            else "explicit",
        }

    def __eq__(self, other):
        if not isinstance(other, ParamSpec):
            return NotImplemented
        return (self._branching, self._ratio, self._gaps) == (
            other._branching, other._ratio, other._gaps)

    def __hash__(self):
        return hash((self._branching, self._ratio, self._gaps))


# ---------------------------------------------------------------------------
# normalisation


def _branching_source(raw, periodic: bool) -> SeqSource:
    if isinstance(raw, Mapping):
        name = raw.get("rule")
        if name not in BRANCHING_RULES:
            raise ConfigError(f"unknown branching rule {name!r}")
        return SeqSource(rule=name, params=_rule_params(raw.get("params")))
    vals = []
    for v in raw:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"branching entries must be integers, got {v!r}")
        vals.append(v)
    return SeqSource(tuple(vals), periodic)


def _ratio_source(raw, periodic: bool) -> SeqSource:
    if isinstance(raw, Mapping):
        name = raw.get("rule")
        if name not in RATIO_RULES:
            raise ConfigError(f"unknown ratio rule {name!r}")
        return SeqSource(rule=name, params=_rule_params(raw.get("params")))
    return SeqSource(tuple(parse_rational(v) for v in raw), periodic)


def _gap_rows(raw) -> tuple:
    return tuple(tuple(parse_rational(v) for v in row) for row in raw)


def normalize_params(raw: Mapping, depth: int | None = None) -> ParamSpec:
    """Build a validated ParamSpec from a JSON-style mapping.

    ``raw`` has keys ``branching``, ``ratio`` and ``gaps``; each is an
    explicit array or ``{"rule": name, "params": {...}}``.  Explicit gaps are
    relative (``e = eta / delta_{k-1}``) unless ``gap_kind`` is
    ``"absolute"``, in which case they are converted exactly.  ``tail`` is
    ``"explicit"`` (default) or ``"periodic"`` for explicit arrays.
    """
    if isinstance(raw, ParamSpec):
        raw.validate(depth)
        return raw
    missing = {"branching", "ratio", "gaps"} - set(raw)
    if missing:
        raise ConfigError(f"parameter document missing {sorted(missing)}")
    tail = raw.get("tail", "explicit")
    if tail not in ("explicit", "periodic"):
        raise ConfigError(f"unknown tail {tail!r}")
    periodic = tail == "periodic"
    branching = _branching_source(raw["branching"], periodic)
    ratio = _ratio_source(raw["ratio"], periodic)

    gaps_raw = raw["gaps"]
    gap_kind = raw.get("gap_kind", "relative")
    if isinstance(gaps_raw, Mapping):
        name = gaps_raw.get("rule")
        if name not in GAP_RULES:
            raise ConfigError(f"unknown gap rule {name!r}")
        gaps = SeqSource(rule=name, params=_rule_params(gaps_raw.get("params")))
    elif gap_kind == "relative":
        gaps = SeqSource(_gap_rows(gaps_raw), periodic)
    elif gap_kind == "absolute":
        if periodic:
            raise ConfigError("absolute gaps cannot repeat periodically; use relative gaps")
        rel, delta_prev = [], Fraction(1)
        for k, row in enumerate(_gap_rows(gaps_raw), start=1):
            rel.append(tuple(x / delta_prev for x in row))
            delta_prev *= _value_at(ratio, RATIO_RULES, k)
        gaps = SeqSource(tuple(rel), False)
    else:
        raise ConfigError(f"unknown gap_kind {gap_kind!r}")

    spec = ParamSpec(branching, ratio, gaps)
    spec.validate(depth)
    return spec


def uniform_cantor(n, c) -> ParamSpec:
    """Zero end gaps and equal interior gaps ``(1 - n c) / (n - 1)``.

    ``n`` and ``c`` are constants or explicit finite sequences.
    """
    if isinstance(n, int):
        branching = SeqSource(rule="constant", params=_rule_params({"n": n}))
    else:
        branching = SeqSource(tuple(int(v) for v in n))
    if isinstance(c, (str, Fraction, int)):
        ratio = SeqSource(rule="constant", params=_rule_params({"c": format_rational(parse_rational(c))}))
    else:
        ratio = SeqSource(tuple(parse_rational(v) for v in c))
    spec = ParamSpec(branching, ratio, SeqSource(rule="uniform"))
    spec.validate(spec.depth_limit or 1)
    return spec


def middle_thirds() -> ParamSpec:
    return uniform_cantor(2, Fraction(1, 3))


def full_interval() -> ParamSpec:
    """n_k = 2, c_k = 1/2: no gaps, the limit set is [0, 1]."""
    return uniform_cantor(2, Fraction(1, 2))


def dim_one_family(n: int = 2, power: int = 2) -> ParamSpec:
    """c_k = (1 - (k+1)^-power) / n with equal interior gaps; dimension one."""
    spec = ParamSpec(
        SeqSource(rule="constant", params=_rule_params({"n": n})),
        SeqSource(rule="defect_power", params=_rule_params({"n": n, "power": power})),
        SeqSource(rule="uniform"),
    )
    spec.validate(1)
    return spec


# ---------------------------------------------------------------------------
# lengths and counts


def delta(params: ParamSpec, k: int) -> Fraction:
    """Common length of level-k fundamental intervals, c_1 * ... * c_k."""
    if k < 0:
        raise DepthError(f"negative level {k}")
    out = Fraction(1)
    for i in range(1, k + 1):
        out *= params.ratio(i)
    return out


def count(params: ParamSpec, k: int) -> int:
    """Number of level-k fundamental intervals, n_1 * ... * n_k."""
    if k < 0:
        raise DepthError(f"negative level {k}")
    out = 1
    for i in range(1, k + 1):
        out *= params.branching(i)
    return out


def gap_lengths(params: ParamSpec, k: int) -> tuple:
    """Absolute gaps (eta_{k,0}, ..., eta_{k,n_k}) inside each level-(k-1) parent."""
    if k < 1:
        raise DepthError(f"gaps are defined for k >= 1, got {k}")
    parent = delta(params, k - 1)
    return tuple(e * parent for e in params.relative_gaps(k))


# ---------------------------------------------------------------------------
# level sets


@dataclass(frozen=True)
class FundamentalInterval:
    level: int
    address: tuple
    left: Fraction
    right: Fraction

    @property
    def length(self) -> Fraction:
        return self.right - self.left


@dataclass(frozen=True, eq=False)
class LevelSet:
    """All N_k level-k intervals, left to right, as numerators over ``denominator``."""

    level: int
    radices: tuple
    denominator: int
    numerators: list
    width: int

    def __len__(self):
        return len(self.numerators)

    @property
    def count(self) -> int:
        return len(self.numerators)

    @property
    def delta(self) -> Fraction:
        return Fraction(self.width, self.denominator)

    @property
    def total_length(self) -> Fraction:
        return Fraction(self.width * len(self.numerators), self.denominator)

    def address_of(self, index: int) -> tuple:
        digits = []
        for n in reversed(self.radices):
            index, r = divmod(index, n)
            digits.append(r + 1)
        return tuple(reversed(digits))

    def index_of(self, address: Sequence[int]) -> int:
        if len(address) != self.level:
            raise DepthError(f"address {address} is not at level {self.level}")
        index = 0
        for i, n in zip(address, self.radices):
            if not 1 <= i <= n:
                raise DepthError(f"address digit {i} outside 1..{n}")
            index = index * n + (i - 1)
        return index

    def interval(self, index: int) -> FundamentalInterval:
        a = self.numerators[index]
        return FundamentalInterval(
            self.level, self.address_of(index),
            Fraction(a, self.denominator), Fraction(a + self.width, self.denominator))

    def __getitem__(self, index):
        return self.interval(range(len(self))[index])

    def __iter__(self):
        for i in range(len(self)):
            yield self.interval(i)

    @cached_property
    def intervals(self) -> list:
        return list(self)

    def exact_pairs(self) -> list:
        d, w = self.denominator, self.width
        return [(Fraction(a, d), Fraction(a + w, d)) for a in self.numerators]


def _level_offsets(rule: LevelRule, parent_len: Fraction) -> tuple:
    child = parent_len * rule.c
    gaps = [e * parent_len for e in rule.e]
    offs, pos = [], gaps[0]
    for i in range(rule.n):
        offs.append(pos)
        pos += child + gaps[i + 1]
    return tuple(offs), child


def build_levels(params: ParamSpec, k: int, cap: int = DEFAULT_CAP) -> list:
    """Level sets for levels 0..k."""
    if k < 0:
        raise DepthError(f"negative level {k}")
    total = count(params, k)
    if total > cap:
        raise CapacityError(f"N_{k} = {total} exceeds the interval cap {cap}")
    den, width, lefts = 1, 1, [0]
    levels = [LevelSet(0, (), 1, [0], 1)]
    parent_len = Fraction(1)
    radices = ()
    for j in range(1, k + 1):
        rule = params.level(j)
        offs, child = _level_offsets(rule, parent_len)
        new_den = math.lcm(den, child.denominator, *(o.denominator for o in offs))
        scale = new_den // den
        offs_int = [o.numerator * (new_den // o.denominator) for o in offs]
        lefts = [a * scale + o for a in lefts for o in offs_int]
        width = child.numerator * (new_den // child.denominator)
        den, parent_len = new_den, child
        radices = radices + (rule.n,)
        levels.append(LevelSet(j, radices, den, lefts, width))
    return levels


def build_level(params: ParamSpec, k: int, cap: int = DEFAULT_CAP) -> LevelSet:
    """Exact level-k fundamental intervals."""
    return build_levels(params, k, cap)[-1]
