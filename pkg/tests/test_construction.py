from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qsminimal.construction import (
    build_level,
    build_levels,
    count,
    delta,
    dim_one_family,
    full_interval,
    gap_lengths,
    middle_thirds,
    normalize_params,
    uniform_cantor,
)
from qsminimal.errors import (
    CapacityError,
    ConfigError,
    ConsistencyError,
    DepthError,
    RangeError,
)

from conftest import param_specs
from oracles import dim_one_ratio, middle_thirds_level

F = Fraction


def test_middle_thirds_first_levels():
    lv1 = build_level(middle_thirds(), 1)
    assert lv1.exact_pairs() == [(F(0), F(1, 3)), (F(2, 3), F(1))]
    lv2 = build_level(middle_thirds(), 2)
    assert lv2.exact_pairs() == [(F(0), F(1, 9)), (F(2, 9), F(1, 3)),
                                 (F(2, 3), F(7, 9)), (F(8, 9), F(1))]


@pytest.mark.parametrize("k", [0, 1, 3, 7])
def test_middle_thirds_matches_recursion(k):
    assert build_level(middle_thirds(), k).exact_pairs() == middle_thirds_level(k)


def test_uniform_cantor_gaps():
    spec = uniform_cantor(3, F(1, 5))
    assert spec.relative_gaps(1) == (0, F(1, 5), F(1, 5), 0)
    assert gap_lengths(spec, 2) == (0, F(1, 25), F(1, 25), 0)
    assert uniform_cantor(2, F(1, 2)).relative_gaps(4) == (0, 0, 0)


def test_uniform_cantor_rejects_overfull():
    with pytest.raises(RangeError):
        uniform_cantor(3, F(2, 5))


def test_consistency_error_names_level_and_residual():
    doc = {"branching": [2, 2], "ratio": ["1/3", "1/3"],
           "gaps": [["0", "1/3", "0"], ["0", "1/2", "0"]]}
    with pytest.raises(ConsistencyError) as info:
        normalize_params(doc)
    assert info.value.level == 2
    assert info.value.residual == F(1, 6)


@pytest.mark.parametrize("bad", [0.5, "0.5", True])
def test_decimal_and_bool_ratios_rejected(bad):
    doc = {"branching": [2], "ratio": [bad], "gaps": [["0", "0", "0"]]}
    with pytest.raises(ConfigError):
        normalize_params(doc)


def test_negative_gap_rejected():
    doc = {"branching": [2], "ratio": ["1/2"], "gaps": [["-1/4", "1/4", "0"]]}
    with pytest.raises(RangeError):
        normalize_params(doc)


def test_absolute_gaps_convert_exactly():
    rel = {"branching": [2, 3], "ratio": ["1/3", "1/4"],
           "gaps": [["0", "1/3", "0"], ["1/8", "0", "1/8", "0"]]}
    ab = dict(rel, gap_kind="absolute",
              gaps=[["0", "1/3", "0"], ["1/24", "0", "1/24", "0"]])
    assert normalize_params(ab) == normalize_params(rel)


def test_explicit_prefix_has_depth_limit():
    doc = {"branching": [2, 2], "ratio": ["1/3", "1/3"],
           "gaps": [["0", "1/3", "0"]] * 2}
    spec = normalize_params(doc)
    assert spec.depth_limit == 2
    with pytest.raises(DepthError):
        build_level(spec, 3)
    periodic = normalize_params(dict(doc, tail="periodic"))
    assert periodic.depth_limit is None
    assert build_level(periodic, 5).count == 32


def test_capacity_cap():
    with pytest.raises(CapacityError):
        build_level(middle_thirds(), 10, cap=1000)


def test_named_family_values():
    spec = dim_one_family()
    for k in range(1, 8):
        assert spec.ratio(k) == dim_one_ratio(k)
        assert spec.relative_gaps(k) == (0, 1 - 2 * dim_one_ratio(k), 0)


def test_json_round_trip():
    for spec in (middle_thirds(), dim_one_family(), uniform_cantor(3, "1/5")):
        again = normalize_params(spec.to_json())
        assert all(again.level(k) == spec.level(k) for k in range(1, 10))


def test_full_interval_is_gapless():
    lv = build_level(full_interval(), 6)
    assert lv.total_length == 1
    pairs = lv.exact_pairs()
    assert all(pairs[i][1] == pairs[i + 1][0] for i in range(len(pairs) - 1))


def test_addresses_round_trip():
    lv = build_level(uniform_cantor(3, F(1, 5)), 3)
    for i in range(lv.count):
        assert lv.index_of(lv.address_of(i)) == i
    assert lv[0].address == (1, 1, 1)
    assert lv[-1].address == (3, 3, 3)


# properties -----------------------------------------------------------------


@given(param_specs())
def test_exactness_along_chains(spec):
    depth = spec.depth_limit
    levels = build_levels(spec, depth)
    # along the chain of last children: child length + all gaps at each level
    # + siblings = parent length, so unrolling reconstructs 1
    total = Fraction(0)
    for k in range(1, depth + 1):
        n = spec.branching(k)
        total += sum(gap_lengths(spec, k)) + (n - 1) * delta(spec, k)
    total += delta(spec, depth)
    assert total == 1
    assert levels[depth].total_length == count(spec, depth) * delta(spec, depth)


@given(param_specs(min_depth=2))
def test_length_identity(spec):
    for k in range(spec.depth_limit):
        lhs = delta(spec, k)
        rhs = sum(gap_lengths(spec, k + 1)) + spec.branching(k + 1) * delta(spec, k + 1)
        assert lhs == rhs


@given(param_specs(min_depth=2))
def test_nesting(spec):
    levels = build_levels(spec, spec.depth_limit)
    for k in range(1, len(levels)):
        parents = levels[k - 1]
        n = spec.branching(k)
        for i, (a, b) in enumerate(levels[k].exact_pairs()):
            owners = [j for j, (pa, pb) in enumerate(parents.exact_pairs()) if pa <= a and b <= pb]
            assert owners == [i // n]


@given(param_specs(min_depth=2))
def test_self_affinity(spec):
    depth = spec.depth_limit
    levels = build_levels(spec, depth)
    inner = build_level(spec.shifted(1), 1).exact_pairs()
    d1 = delta(spec, 1)
    for j, (pa, _) in enumerate(levels[1].exact_pairs()):
        n = spec.branching(2)
        kids = levels[2].exact_pairs()[j * n:(j + 1) * n]
        assert kids == [(pa + d1 * a, pa + d1 * b) for a, b in inner]


@given(param_specs())
def test_addresses_ordered_left_to_right(spec):
    lv = build_level(spec, spec.depth_limit)
    ivs = list(lv)
    for u, v in zip(ivs, ivs[1:]):
        assert u.address < v.address
        assert u.right <= v.left


@given(st.integers(2, 6), st.integers(1, 30))
def test_uniform_cantor_consistency(n, den):
    c = Fraction(1, max(den, n))
    spec = uniform_cantor(n, c)
    rule = spec.level(3)
    assert sum(rule.e) + rule.n * rule.c == 1
    assert rule.e[0] == rule.e[-1] == 0


def test_delta_and_count_examples():
    assert delta(middle_thirds(), 3) == F(1, 27)
    assert delta(dim_one_family(), 0) == 1
    assert delta(dim_one_family(), 2) == F(1, 6)
    assert count(middle_thirds(), 5) == 32
    assert count(middle_thirds(), 0) == 1
    spec = normalize_params({"branching": [2, 3, 2], "ratio": ["1/3", "1/4", "1/3"],
                             "gaps": [["0", "1/3", "0"], ["0", "1/8", "1/8", "0"],
                                      ["0", "1/3", "0"]]})
    assert count(spec, 3) == 12


def test_gap_length_examples():
    assert gap_lengths(middle_thirds(), 1) == (0, F(1, 3), 0)
    assert gap_lengths(middle_thirds(), 2) == (0, F(1, 9), 0)
    assert gap_lengths(dim_one_family(), 1) == (0, F(1, 4), 0)


def test_touching_children():
    spec = normalize_params({"branching": [2], "ratio": ["1/4"],
                             "gaps": [["1/4", "0", "1/4"]]})
    assert build_level(spec, 1).exact_pairs() == [(F(1, 4), F(1, 2)), (F(1, 2), F(3, 4))]
