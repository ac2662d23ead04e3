"""Configurations, their splits, compatibility and subdivisions."""
import itertools

import pytest

from tightspans.configurations import (WeightFunction, brute_force_splits,
                                       build_configuration, check_subdivision, config_edges,
                                       enumerate_splits, parse_subset_label,
                                       split_from_directed, split_from_partial_split,
                                       split_weight, splits_compatible, subset_label)
from tightspans.errors import EnumerationCapError, UsageError
from tightspans.exact import GroundSet


def test_point_counts():
    X = "1234"
    assert len(build_configuration("A", X)) == 10
    assert len(build_configuration("A_bar", X)) == 6
    assert len(build_configuration("B", "12", "ab")) == 4 + 4
    assert len(build_configuration("B_bar", "12", "ab")) == 4
    assert len(build_configuration("B_directed", "12")) == 8
    assert len(build_configuration("B_bar_directed", "12")) == 4
    assert len(build_configuration("C_cube", "12")) == 8
    assert len(build_configuration("hypersimplex", X, k=2)) == 6


@pytest.mark.parametrize("args", [("Z", "12"), ("B", "12"), ("B", "12", "2a"),
                                  ("hypersimplex", "12", None, 3)])
def test_bad_configurations(args):
    with pytest.raises(UsageError):
        build_configuration(*args)


def test_subset_labels_roundtrip():
    Y = GroundSet(["1", "2", "10"])
    S = frozenset({"10", "2"})
    assert subset_label(S, Y) == "{2,10}"
    assert parse_subset_label("{2,10}") == S


@pytest.mark.parametrize("kind,X,Y,count", [("A", "123", None, 6), ("A", "1234", None, 25),
                                            ("B_bar", "12", "ab", 2),
                                            ("B_bar", "123", "ab", None)])
def test_split_census_matches_brute_force(kind, X, Y, count):
    A = build_configuration(kind, X, Y)
    closed = enumerate_splits(A)
    brute = brute_force_splits(A)
    assert {s.key for s in closed} == {s.key for s in brute}
    if count is not None:
        assert len(closed) == count


def test_split_sides_are_closed_half_spaces():
    A = build_configuration("A", "123")
    s = split_from_partial_split(A, {"1"}, {"2", "3"})
    assert s.plus & s.minus == {"1+2", "1+3"}
    w = split_weight(A, s)
    assert dict(zip(A.labels, w.values))["1+1"] == 2


def test_edges_of_the_square():
    A = build_configuration("B_bar", "12", "ab")
    assert len(config_edges(A)) == 4


@pytest.mark.parametrize("kind,X,Y", [("A", "1234", None), ("B_bar", "123", "ab")])
def test_compatibility_methods_agree(kind, X, Y):
    A = build_configuration(kind, X, Y)
    splits = enumerate_splits(A)
    for s, t in itertools.combinations(splits, 2):
        assert splits_compatible(A, s, t, "geometric") == splits_compatible(A, s, t, "combinatorial")


def test_directed_compatibility_methods_agree_on_three_points():
    A = build_configuration("B_bar_directed", "123")
    seen = {}
    for S in map(frozenset, [{"1"}, {"2"}, {"1", "2"}, {"3"}, {"1", "3"}, {"2", "3"}]):
        for T in map(frozenset, [{"1"}, {"2"}, {"3"}, {"2", "3"}, {"1", "2"}, {"1", "3"}]):
            if not S & T:
                s = split_from_directed(A, S, T)
                seen.setdefault(s.key, s)
    splits = list(seen.values())
    for s, t in itertools.combinations(splits, 2):
        assert splits_compatible(A, s, t, "geometric") == splits_compatible(A, s, t, "combinatorial")


def test_untagged_combinatorial_is_rejected():
    A = build_configuration("B_directed", "12")
    s, t = brute_force_splits(A)[:2]
    with pytest.raises(UsageError):
        splits_compatible(A, s, t, "combinatorial")


def test_brute_force_guard():
    A = build_configuration("A", "1234")
    with pytest.raises(EnumerationCapError):
        brute_force_splits(A, limit=10)
    with pytest.raises(UsageError):
        enumerate_splits(build_configuration("C_cube", "12"))


def _closure(c):
    return {frozenset(x) for r in range(1, len(c) + 1) for x in itertools.combinations(c, r)}


def test_check_subdivision_on_a_square():
    A = build_configuration("B_bar", "12", "ab")
    assert A.labels == ("1+a", "1+b", "2+a", "2+b")
    good = _closure({"1+a", "1+b", "2+a"}) | _closure({"1+b", "2+a", "2+b"})
    assert check_subdivision(A, good) == []
    assert check_subdivision(A, _closure({"1+a", "1+b", "2+a"})) != []
    crossing = good | _closure({"1+a", "2+a", "2+b"})
    assert check_subdivision(A, crossing) != []


def test_weight_function_from_mapping():
    A = build_configuration("A", "12")
    w = WeightFunction.from_mapping(A, {"1+1": 0, "1+2": "-3/2", "2+2": 0})
    assert w.values[1] == -1.5
