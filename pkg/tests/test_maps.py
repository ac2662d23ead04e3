"""Maps, their validators, transforms and weights."""
import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tightspans.configurations import build_configuration, nonempty_subsets
from tightspans.engine import envelope, tight_span_of
from tightspans.errors import PreconditionError, UsageError
from tightspans.exact import GroundSet, QVector
from tightspans.maps import (DirectedDistance, DirectedMap, Distance, Diversity, Metric,
                             SymmetricMap, check_A1_A3, diversity_distance, diversity_to_sym,
                             make_weight, monotonicity_violations, normalize_directed,
                             normalize_symmetric, positive_part, sym_to_diversity, undirect,
                             validate)
from tightspans.polyhedron import canonicalize
from tightspans.trees import PartialSplit, WeightedSplitSystem, map_from_splits

small = st.integers(0, 4)


def unit_metric(n=3):
    return Metric([str(i) for i in range(1, n + 1)], lambda x, y: int(x != y))


def four_cycle():
    return Metric("xyuv", {("x", "y"): 1, ("y", "u"): 1, ("u", "v"): 1, ("v", "x"): 1,
                           ("x", "u"): 2, ("y", "v"): 2})


def split_diversity():
    S = WeightedSplitSystem("123", [PartialSplit({"1"}, {"2", "3"})], [1])
    return map_from_splits("diversity", S)


@st.composite
def diversities(draw, n=3):
    """Diversities as nonnegative combinations of split diversities."""
    Y = [str(i) for i in range(1, n + 1)]
    splits = [PartialSplit(set(c), set(Y) - set(c))
              for k in range(1, n) for c in itertools.combinations(Y, k) if "1" in c]
    alpha = [draw(small) for _ in splits]
    kept = [(s, a) for s, a in zip(splits, alpha) if a]
    return map_from_splits("diversity", WeightedSplitSystem(
        Y, [s for s, _ in kept], [a for _, a in kept]))


def test_unit_metric_is_valid_and_four_point():
    D = unit_metric()
    assert validate(D) == [] and validate(D, "four_point") == []


def test_four_cycle_is_a_metric_failing_four_point():
    D = four_cycle()
    assert validate(D) == []
    assert validate(D, "four_point") != []


def test_asymmetric_matrix_is_rejected():
    with pytest.raises(UsageError):
        Metric.from_matrix("12", [[0, 1], [2, 0]])


def test_nonmonotone_diversity_violates_d1():
    d = Diversity("123", {frozenset("12"): 1, frozenset("13"): 0, frozenset("23"): 0,
                          frozenset("123"): 0})
    assert monotonicity_violations(d) != []
    assert any("(D1)" in v for v in validate(d))


def test_directed_validators():
    D = DirectedMap("12", {("1", "2"): -1, ("2", "1"): 0})
    assert validate(D, "directed_distance") == ["negative value: D(1,2) = -1"]
    D = DirectedMap("123", {("1", "2"): 1, ("2", "3"): 1, ("1", "3"): 3,
                            ("2", "1"): 0, ("3", "1"): 0, ("3", "2"): 0})
    assert validate(D, "directed_metric") != []


def test_normalize_symmetric():
    D = SymmetricMap("xy", {("x", "x"): 2, ("y", "y"): 0, ("x", "y"): 3})
    Dp, v = normalize_symmetric(D)
    assert Dp("x", "y") == 2 and v.coords == (1, 0)
    Dp, v = normalize_symmetric(unit_metric())
    assert Dp == unit_metric() and v.is_zero()


def test_normalize_directed_shift():
    D = DirectedMap("12", {("1", "1"): 2, ("2", "2"): 4, ("1", "2"): 1, ("2", "1"): 5})
    Dp, v = normalize_directed(D)
    assert Dp("1", "1") == 0 and Dp("1", "2") == -2
    assert v.coords == (1, 2, 1, 2)
    with pytest.raises(PreconditionError):
        normalize_directed(DirectedMap("1", {("1", "a"): 1}, Y="a"))


def test_shift_of_a_symmetric_map_translates_the_tight_span():
    rng = random.Random(3)
    for _ in range(5):
        vals = {(x, y): rng.randint(0, 4) for x, y in itertools.combinations_with_replacement("123", 2)}
        D = SymmetricMap("123", vals)
        Dp, v = normalize_symmetric(D)
        a = {u.coords for u in tight_span_of(D).vertices}
        b = {(u + v).coords for u in tight_span_of(Dp).vertices}
        assert a == b


def test_positive_part():
    D = Distance("12", {("1", "2"): 3})
    assert positive_part(D) == D
    M = SymmetricMap("12", {("1", "2"): -1})
    Mp = positive_part(M)
    assert Mp("1", "2") == 0
    A = build_configuration("A", "12")
    assert canonicalize(envelope(A, make_weight(M, A))) == \
        canonicalize(envelope(A, make_weight(Mp, A)))


def test_positive_part_of_a_mixed_directed_map():
    D = DirectedMap("12", {("1", "2"): -2, ("2", "1"): 3})
    a = {v.coords for v in tight_span_of(D).vertices}
    b = {v.coords for v in tight_span_of(positive_part(D)).vertices}
    assert a == b


def test_undirect():
    D = DirectedMap("12", {("1", "2"): 1, ("2", "1"): 0})
    Du = undirect(D)
    nonzero = [(p, v) for p, v in Du.pairs() if v]
    assert nonzero == [(("1_l", "2_r"), 1)]
    assert undirect(DirectedMap("12", lambda x, y: 0)) == Distance(Du.ground, lambda x, y: 0)


@settings(max_examples=15, deadline=None)
@given(st.lists(small, min_size=6, max_size=6))
def test_undirected_envelope_equals_directed_envelope(vals):
    pairs = [(x, y) for x in "123" for y in "123" if x != y]
    D = DirectedDistance("123", dict(zip(pairs, vals)))
    Du = undirect(D)
    A = build_configuration("A", Du.ground)
    B = build_configuration("B_directed", "123")
    assert canonicalize(envelope(A, make_weight(Du, A))) == \
        canonicalize(envelope(B, make_weight(D, B)))


def test_diversity_to_sym_examples():
    z = Diversity("123", lambda S: 0)
    Dz = diversity_to_sym(z)
    assert all(v == 0 for _, v in Dz.pairs()) and check_A1_A3(Dz) == []
    D = diversity_to_sym(split_diversity())
    assert D("{1}", "{2}") == 1 and D("{1}", "{1}") == 0


def test_a3_violation_is_witnessed():
    D = diversity_to_sym(split_diversity())
    bad = D.map_values(lambda v: v)
    bad._values[("{1}", "{2}")] = Fraction(5)
    assert any("(A3)" in v for v in check_A1_A3(bad))
    assert diversity_to_sym(sym_to_diversity(bad)) != bad


def test_diversity_distance_examples():
    d = diversity_distance(split_diversity())
    assert d("{1}", "{2}") == 1 and d("{2}", "{3}") == 0 and d("{1,2}", "{3}") == 0


@settings(max_examples=40, deadline=None)
@given(diversities())
def test_diversity_round_trip_and_axioms(delta):
    assert validate(delta) == [] and monotonicity_violations(delta) == []
    assert sym_to_diversity(diversity_to_sym(delta)) == delta
    D = diversity_to_sym(delta)
    assert check_A1_A3(D) == []
    d = diversity_distance(delta)
    assert positive_part(normalize_symmetric(D)[0]) == d
    for a, b in itertools.product(d.ground.labels, repeat=2):
        if set(a[1:-1].split(",")) & set(b[1:-1].split(",")):
            assert d(a, b) == 0
        assert d(a, b) >= 0


@settings(max_examples=30, deadline=None)
@given(diversities(), diversities())
def test_diversity_distance_is_injective(d1, d2):
    assert (diversity_distance(d1) == diversity_distance(d2)) == (d1 == d2)


def test_diversity_on_four_points_is_exhaustively_monotone():
    Y = "1234"
    S = WeightedSplitSystem(Y, [PartialSplit({"1", "2"}, {"3", "4"}),
                                PartialSplit({"1", "3"}, {"2", "4"})], [1, 2])
    delta = map_from_splits("diversity", S)
    assert validate(delta) == [] and monotonicity_violations(delta) == []
    assert sym_to_diversity(diversity_to_sym(delta)) == delta
    assert len(nonempty_subsets(GroundSet(Y))) == 15


def test_make_weight_examples():
    A = build_configuration("A", "123")
    w = dict(zip(A.labels, make_weight(unit_metric(), A).values))
    assert w == {"1+1": 0, "1+2": -1, "1+3": -1, "2+2": 0, "2+3": -1, "3+3": 0}
    C = build_configuration("C_cube", "123")
    wc = dict(zip(C.labels, make_weight(split_diversity(), C).values))
    assert wc["{1}+{2}"] == -1
    with pytest.raises(UsageError):
        make_weight(unit_metric(), C)


@settings(max_examples=30, deadline=None)
@given(st.lists(small, min_size=6, max_size=6), st.lists(small, min_size=6, max_size=6))
def test_make_weight_is_linear(u, v):
    keys = list(itertools.combinations_with_replacement("123", 2))
    D, E = SymmetricMap("123", dict(zip(keys, u))), SymmetricMap("123", dict(zip(keys, v)))
    A = build_configuration("A", "123")
    lhs = make_weight(D + E, A).values
    rhs = tuple(a + b for a, b in zip(make_weight(D, A).values, make_weight(E, A).values))
    assert lhs == rhs


def test_qvector_ground_of_directed_weight():
    B = build_configuration("B_bar_directed", "12")
    D = DirectedMap("12", {("1", "2"): 1, ("2", "1"): 2})
    w = dict(zip(B.labels, make_weight(D, B).values))
    assert w == {"1_l+1_r": 0, "1_l+2_r": -1, "2_l+1_r": -2, "2_l+2_r": 0}
    assert isinstance(QVector.zero(B.ground), QVector)
