"""Envelopes, tight-spans, subdivisions, duality and split decomposition."""
import itertools
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from tightspans.configurations import (WeightFunction, build_configuration,
                                       split_from_partial_split, split_weight)
from tightspans.engine import (complex_vertices, envelope, is_tree, minimal_vertices,
                               regular_subdivision, shift_weight, check_shift,
                               split_decomposition, tight_span, tight_span_of,
                               verify_duality)
from tightspans.errors import EnumerationCapError, UsageError
from tightspans.exact import QVector
from tightspans.maps import (DirectedMap, Diversity, KDissimilarity, Metric, SymmetricMap,
                             make_weight, normalize_symmetric)
from tightspans.trees import (DirectedPartialSplit, PartialSplit, WeightedSplitSystem,
                              WeightedTree, distance_from_tree, map_from_splits)


def unit_metric(n=3):
    return Metric([str(i) for i in range(1, n + 1)], lambda x, y: int(x != y))


def quartet():
    T = WeightedTree.leaf_labelled(list("abcduv"), [("a", "u", 1), ("b", "u", 1), ("u", "v", 1),
                                                    ("c", "v", 1), ("d", "v", 1)],
                                   {x: x for x in "abcd"})
    return distance_from_tree(T)


def four_cycle():
    return Metric("xyuv", {("x", "y"): 1, ("y", "u"): 1, ("u", "v"): 1, ("v", "x"): 1,
                           ("x", "u"): 2, ("y", "v"): 2})


def tight_span_oracle(D):
    """Tight-span vertices of a metric from first principles.

    Candidates are the points where n envelope inequalities are tight and
    independent; a feasible candidate belongs to the tight-span iff
    f(x) = max_y D(x, y) - f(y) for every x.
    """
    L = D.ground.labels
    n = len(L)
    rows = [(x, y) for i, x in enumerate(L) for y in L[i:]]
    out = set()
    for chosen in itertools.combinations(rows, n):
        M = sympy.zeros(n, n)
        b = sympy.zeros(n, 1)
        for r, (x, y) in enumerate(chosen):
            M[r, L.index(x)] += 1
            M[r, L.index(y)] += 1
            b[r] = sympy.Rational(D(x, y).numerator, D(x, y).denominator)
        if M.det() == 0:
            continue
        f = M.LUsolve(b)
        f = [Fraction(int(v.p), int(v.q)) for v in f]
        val = dict(zip(L, f))
        if any(val[x] + val[y] < D(x, y) for x, y in rows):
            continue
        if all(val[x] == max(D(x, y) - val[y] for y in L) for x in L):
            out.add(tuple(f))
    return out


def test_envelope_of_two_point_metric():
    D = Metric("12", {("1", "2"): 1})
    A = build_configuration("A", "12")
    P = envelope(A, make_weight(D, A))
    rows = {(a.coords, b) for a, b in P.inequalities}
    assert rows == {((2, 0), 0), ((1, 1), 1), ((0, 2), 0)}
    ts = tight_span(A, make_weight(D, A))
    assert {v.coords for v in complex_vertices(ts)} == {(1, 0), (0, 1)}
    assert ts.dimension == 1


def test_zero_weight_gives_a_point():
    A = build_configuration("A", "123")
    w = WeightFunction(A, (0,) * len(A))
    ts = tight_span(A, w)
    assert [v.coords for v in complex_vertices(ts)] == [(0, 0, 0)]
    t = is_tree(ts)
    assert len(t.vertices) == 1 and t.edges == ()
    sub = regular_subdivision(A, w)
    assert sub.maximal_cells() == [frozenset(A.labels)]
    rep = verify_duality(A, w)
    assert rep.ok and len(sub.interior_cells()) == 1


def test_unit_metric_star():
    ts = tight_span_of(unit_metric())
    half = Fraction(1, 2)
    assert {v.coords for v in complex_vertices(ts)} == \
        {(half, half, half), (0, 1, 1), (1, 0, 1), (1, 1, 0)}
    t = is_tree(ts)
    assert len(t.edges) == 3 and all(l == half for *_, l in t.edges)


def test_unit_metric_subdivision_and_duality():
    D = unit_metric()
    A = build_configuration("A", D.ground)
    w = make_weight(D, A)
    sub = regular_subdivision(A, w)
    assert len(sub.maximal_cells()) == 4
    assert len(sub.interior_cells()) == 4 + 3
    assert set(sub.cells) == set(regular_subdivision(A, w, "envelope").cells)
    rep = verify_duality(A, w)
    assert rep.ok and rep.maximal_faces == rep.minimal_interior_cells == 3


def test_quartet_and_four_cycle():
    t = is_tree(tight_span_of(quartet()))
    assert len(t.vertices) == 6 and len(t.edges) == 5
    assert sorted(l for *_, l in t.edges) == [1] * 5
    assert is_tree(tight_span_of(four_cycle())) is None
    assert split_decomposition(build_configuration("A", "xyuv"),
                               make_weight(four_cycle(), build_configuration("A", "xyuv"))) is None


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=6, max_size=6))
def test_tight_span_matches_first_principles(vals):
    pairs = list(itertools.combinations("1234", 2))
    D = Metric("1234", dict(zip(pairs, vals)))
    ts = tight_span_of(D)
    assert {v.coords for v in complex_vertices(ts)} == tight_span_oracle(D)
    assert complex_vertices(ts) == minimal_vertices(ts)


def test_split_weight_subdivision_has_two_cells():
    A = build_configuration("A", "123")
    s = split_from_partial_split(A, {"1"}, {"2", "3"})
    sub = regular_subdivision(A, split_weight(A, s))
    assert set(sub.maximal_cells()) == {s.plus, s.minus}
    dec = split_decomposition(A, split_weight(A, s))
    assert dec.alpha == (1,) and dec.affine.is_zero() and dec.constant == 0


def test_unit_metric_decomposition():
    D = unit_metric()
    A = build_configuration("A", D.ground)
    for method in ("refinement", "edges"):
        dec = split_decomposition(A, make_weight(D, A), method=method)
        assert {s.tag.describe(A.X) for s in dec.splits} == {"1|2,3", "1,2|3", "1,3|2"}
        assert set(dec.alpha) == {Fraction(1, 2)}
        assert dec.to_json()["alpha"] == {"1,2|3": "1/2", "1,3|2": "1/2", "1|2,3": "1/2"}


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3),
       st.lists(st.integers(0, 3), min_size=6, max_size=6))
def test_shift_translates_vertex_sets(v, vals):
    keys = list(itertools.combinations_with_replacement("123", 2))
    D = SymmetricMap("123", dict(zip(keys, vals)))
    A = build_configuration("A", "123")
    assert check_shift(A, make_weight(D, A), QVector(A.ground, v))


def test_shift_examples():
    D = Metric("12", {("1", "2"): 1})
    A = build_configuration("A", "12")
    w = make_weight(D, A)
    assert shift_weight(w, QVector.zero(A.ground)) == w
    v = QVector(A.ground, [1, 0])
    a = complex_vertices(tight_span(A, w))
    b = complex_vertices(tight_span(A, shift_weight(w, v)))
    assert {x.coords for x in b} == {(x - v).coords for x in a}


def test_normalization_round_trip_via_shift():
    rng = random.Random(5)
    keys = list(itertools.combinations_with_replacement("123", 2))
    D = SymmetricMap("123", {k: rng.randint(0, 5) for k in keys})
    Dp, v = normalize_symmetric(D)
    A = build_configuration("A", "123")
    assert shift_weight(make_weight(D, A), v) == make_weight(Dp, A)


@settings(max_examples=12, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=6, max_size=6))
def test_duality_on_octahedron(vals):
    A = build_configuration("A_bar", "1234")
    rep = verify_duality(A, WeightFunction(A, tuple(vals)))
    assert rep.ok, rep.problems


def test_directed_split_theta_is_an_edge():
    S = WeightedSplitSystem("12", [DirectedPartialSplit({"1"}, {"2"})], [1])
    ts = tight_span_of(map_from_splits("directed", S), "Theta")
    t = is_tree(ts)
    assert t is not None and len(t.edges) == 1


def test_split_diversity_tbar_is_a_tree():
    S = WeightedSplitSystem("123", [PartialSplit({"1"}, {"2", "3"})], [1])
    ts = tight_span_of(map_from_splits("diversity", S), "T_bar")
    assert is_tree(ts) is not None


def test_kdissimilarity_tight_span_enumerates():
    T = WeightedTree.leaf_labelled(list("12345uv"), [("1", "u", 1), ("2", "u", 1), ("u", "v", 1),
                                                      ("3", "v", 1), ("v", "4", 1), ("v", "5", 2)],
                                   {x: x for x in "12345"})
    D = distance_from_tree(T)

    def tree_length(S):
        # length of the subtree spanned by S: half the tour around its leaves
        S = sorted(S)
        return sum(D(a, b) for a, b in zip(S, S[1:] + S[:1])) / 2
    K = KDissimilarity("12345", 3, lambda S: Fraction(0) + max(
        tree_length(p) for p in itertools.permutations(S)))
    ts = tight_span_of(K)
    assert ts.complex.vertices and ts.to_json()["object"].startswith("T_D")


def test_cube_cap_and_dispatch_errors():
    d = Diversity("123", lambda S: len(S) // 2)
    with pytest.raises(EnumerationCapError):
        tight_span_of(d, "T", cap=3)
    with pytest.raises(UsageError):
        tight_span_of(d, "nope")
    with pytest.raises(UsageError):
        tight_span_of(object())


def test_directed_tight_spans_on_two_sets():
    D = DirectedMap("12", {("1", "a"): 1, ("1", "b"): 2, ("2", "a"): 0, ("2", "b"): 1}, Y="ab")
    assert tight_span_of(D, "Theta").complex.vertices
    assert tight_span_of(D).complex.vertices
