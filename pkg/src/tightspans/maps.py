"""Maps whose tight-spans we compute: symmetric and directed maps, diversities.

Every map stores all of its values densely with exact rationals.  Validators
return lists of human-readable violations instead of raising, so callers
(the CLI in particular) can report every broken axiom instance at once.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional

from .configurations import (PointConfiguration, WeightFunction, left, nonempty_subsets,
                             parse_subset_label, powerset_ground, right, subset_label)
from .errors import PreconditionError, UsageError
from .exact import GroundSet, QVector, Q, format_rational

HALF = Fraction(1, 2)


def _ground(g) -> GroundSet:
    return g if isinstance(g, GroundSet) else GroundSet(g)


class SymmetricMap:
    """``D: X × X -> Q`` with ``D(x, y) = D(y, x)``, diagonal included."""

    kind = "symmetric"

    def __init__(self, ground, values: Callable | Mapping):
        self.ground = _ground(ground)
        L = self.ground.labels
        vals = {}
        for i, x in enumerate(L):
            for j in range(i, len(L)):
                y = L[j]
                if callable(values):
                    v = values(x, y)
                else:
                    v = values.get((x, y), values.get((y, x)))
                    if v is None:
                        if i == j:
                            v = 0
                        else:
                            raise UsageError(f"missing value for pair ({x}, {y})")
                vals[(x, y)] = Q(v)
        self._values = vals

    @classmethod
    def from_matrix(cls, ground, rows) -> "SymmetricMap":
        g = _ground(ground)
        L = g.labels
        if len(rows) != len(L) or any(len(r) != len(L) for r in rows):
            raise UsageError("matrix shape does not match the ground set")
        M = [[Q(v) for v in r] for r in rows]
        for i in range(len(L)):
            for j in range(i + 1, len(L)):
                if M[i][j] != M[j][i]:
                    raise UsageError(f"matrix is not symmetric at ({L[i]}, {L[j]})")
        return cls(g, lambda x, y: M[g.index(x)][g.index(y)])

    def __call__(self, x, y) -> Fraction:
        x, y = str(x), str(y)
        if (x, y) in self._values:
            return self._values[(x, y)]
        if (y, x) in self._values:
            return self._values[(y, x)]
        raise UsageError(f"({x}, {y}) is not a pair of the ground set")

    def pairs(self):
        """Unordered pairs ``(x, y)`` in ground order, diagonal included."""
        return list(self._values.items())

    def matrix(self) -> list:
        L = self.ground.labels
        return [[self(x, y) for y in L] for x in L]

    def map_values(self, f) -> "SymmetricMap":
        return type(self)(self.ground, lambda x, y: f(self(x, y)))

    def __eq__(self, other) -> bool:
        return (isinstance(other, SymmetricMap) and self.ground == other.ground
                and self._values == other._values)

    def __add__(self, other):
        return SymmetricMap(self.ground, lambda x, y: self(x, y) + other(x, y))

    def __mul__(self, s):
        s = Q(s)
        return SymmetricMap(self.ground, lambda x, y: s * self(x, y))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_json()})"

    def to_json(self) -> dict:
        return {"kind": self.kind, "ground": list(self.ground.labels),
                "matrix": [[format_rational(v) for v in r] for r in self.matrix()]}


class Distance(SymmetricMap):
    kind = "distance"


class Metric(Distance):
    kind = "metric"


class DirectedMap:
    """``D: X × Y -> Q``.  With ``Y`` omitted the codomain is a copy of ``X``."""

    kind = "directed"

    def __init__(self, X, values: Callable | Mapping, Y=None):
        self.X = _ground(X)
        self.Y = _ground(Y) if Y is not None else None
        cod = self.codomain
        vals = {}
        for x in self.X.labels:
            for y in cod.labels:
                if callable(values):
                    v = values(x, y)
                else:
                    v = values.get((x, y))
                    if v is None:
                        if self.Y is None and x == y:
                            v = 0
                        else:
                            raise UsageError(f"missing value for ordered pair ({x}, {y})")
                vals[(x, y)] = Q(v)
        self._values = vals

    @property
    def codomain(self) -> GroundSet:
        return self.Y if self.Y is not None else self.X

    @property
    def square(self) -> bool:
        return self.Y is None

    @classmethod
    def from_matrix(cls, X, rows, Y=None) -> "DirectedMap":
        gx = _ground(X)
        gy = _ground(Y) if Y is not None else gx
        if len(rows) != len(gx) or any(len(r) != len(gy) for r in rows):
            raise UsageError("matrix shape does not match the ground sets")
        M = [[Q(v) for v in r] for r in rows]
        return cls(gx, lambda x, y: M[gx.index(x)][gy.index(y)], Y)

    def __call__(self, x, y) -> Fraction:
        try:
            return self._values[(str(x), str(y))]
        except KeyError:
            raise UsageError(f"({x}, {y}) is not in the domain") from None

    def items(self):
        return list(self._values.items())

    def matrix(self) -> list:
        return [[self(x, y) for y in self.codomain.labels] for x in self.X.labels]

    def map_values(self, f) -> "DirectedMap":
        return type(self)(self.X, lambda x, y: f(self(x, y)), self.Y)

    def __eq__(self, other) -> bool:
        return (isinstance(other, DirectedMap) and self.X == other.X and self.Y == other.Y
                and self._values == other._values)

    def __add__(self, other):
        return DirectedMap(self.X, lambda x, y: self(x, y) + other(x, y), self.Y)

    def __mul__(self, s):
        s = Q(s)
        return DirectedMap(self.X, lambda x, y: s * self(x, y), self.Y)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_json()})"

    def to_json(self) -> dict:
        out = {"kind": self.kind, "X": list(self.X.labels),
               "matrix": [[format_rational(v) for v in r] for r in self.matrix()]}
        if self.Y is not None:
            out["Y"] = list(self.Y.labels)
        return out


class DirectedDistance(DirectedMap):
    kind = "directed_distance"


class DirectedMetric(DirectedDistance):
    kind = "directed_metric"


class Diversity:
    """A set function on the subsets of ``Y``; the empty set always maps to 0."""

    kind = "diversity"

    def __init__(self, ground, values: Callable | Mapping):
        self.ground = _ground(ground)
        for y in self.ground.labels:
            if any(c in y for c in "{},"):
                raise UsageError(f"diversity ground labels may not contain braces or commas: {y!r}")
        vals = {frozenset(): Fraction(0)}
        for S in nonempty_subsets(self.ground):
            if callable(values):
                v = values(S)
            else:
                v = values.get(S)
                if v is None:
                    if len(S) == 1:
                        v = 0
                    else:
                        raise UsageError(f"missing diversity value for {subset_label(S, self.ground)}")
            vals[S] = Q(v)
        self._values = vals

    def __call__(self, S: Iterable) -> Fraction:
        key = frozenset(map(str, S))
        try:
            return self._values[key]
        except KeyError:
            raise UsageError(f"{sorted(key)} is not a subset of the ground set") from None

    def subsets(self) -> list:
        return [frozenset()] + nonempty_subsets(self.ground)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Diversity) and self.ground == other.ground
                and self._values == other._values)

    def __add__(self, other):
        return Diversity(self.ground, lambda S: self(S) + other(S))

    def __mul__(self, s):
        s = Q(s)
        return Diversity(self.ground, lambda S: s * self(S))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"Diversity({self.to_json()})"

    def to_json(self) -> dict:
        return {"kind": self.kind, "ground": list(self.ground.labels),
                "values": {subset_label(S, self.ground): format_rational(self(S))
                           for S in nonempty_subsets(self.ground)}}


class KDissimilarity:
    kind = "kdiss"

    def __init__(self, ground, k: int, values: Callable | Mapping):
        self.ground = _ground(ground)
        if not 1 <= k <= len(self.ground):
            raise UsageError(f"k={k} out of range")
        self.k = k
        vals = {}
        for c in itertools.combinations(self.ground.labels, k):
            S = frozenset(c)
            if callable(values):
                v = values(S)
            else:
                v = values.get(S)
                if v is None:
                    raise UsageError(f"missing value for {subset_label(S, self.ground)}")
            vals[S] = Q(v)
        self._values = vals

    def __call__(self, S) -> Fraction:
        return self._values[frozenset(map(str, S))]

    def items(self):
        return list(self._values.items())

    def to_json(self) -> dict:
        return {"kind": self.kind, "ground": list(self.ground.labels), "k": self.k,
                "values": {subset_label(S, self.ground): format_rational(v)
                           for S, v in self._values.items()}}


# -- validation --------------------------------------------------------------------

def _fmt(v) -> str:
    return format_rational(v)


def _validate_symmetric(D: SymmetricMap, kind: str) -> list:
    out = []
    L = D.ground.labels
    if kind in ("distance", "metric"):
        for x in L:
            if D(x, x) != 0:
                out.append(f"nonzero diagonal: D({x},{x}) = {_fmt(D(x, x))}")
        for (x, y), v in D.pairs():
            if v < 0:
                out.append(f"negative value: D({x},{y}) = {_fmt(v)}")
    if kind == "metric":
        for x, y, z in itertools.permutations(L, 3):
            if D(x, z) > D(x, y) + D(y, z):
                out.append(f"triangle inequality fails: D({x},{z}) > D({x},{y}) + D({y},{z})")
    if kind == "four_point":
        for x, y, u, v in itertools.product(L, repeat=4):
            lhs = D(x, y) + D(u, v)
            if lhs > max(D(x, u) + D(y, v), D(x, v) + D(y, u)):
                out.append(f"four-point condition fails for ({x},{y},{u},{v})")
    return out


def _validate_directed(D: DirectedMap, kind: str) -> list:
    out = []
    if kind in ("directed_distance", "directed_metric"):
        if not D.square:
            return ["directed distances need Y to be a copy of X"]
        for (x, y), v in D.items():
            if x == y and v != 0:
                out.append(f"nonzero diagonal: D({x},{x}) = {_fmt(v)}")
            if v < 0:
                out.append(f"negative value: D({x},{y}) = {_fmt(v)}")
    if kind == "directed_metric":
        for x, y, z in itertools.product(D.X.labels, repeat=3):
            if D(x, z) > D(x, y) + D(y, z):
                out.append(f"triangle inequality fails: D({x},{z}) > D({x},{y}) + D({y},{z})")
    return out


def _validate_diversity(d: Diversity) -> list:
    out = []
    for S in d.subsets():
        if len(S) <= 1 and d(S) != 0:
            out.append(f"(D2) fails: value {_fmt(d(S))} on {subset_label(S, d.ground)}")
    subs = d.subsets()
    for A in subs:
        for C in subs:
            target = d(A | C)
            for B in subs[1:]:
                if d(A | B) + d(B | C) < target:
                    out.append("(D1) fails for A={}, B={}, C={}".format(
                        subset_label(A, d.ground), subset_label(B, d.ground),
                        subset_label(C, d.ground)))
    return out


def validate(m, kind: Optional[str] = None) -> list:
    """Violations of the axioms of ``kind`` (defaults to the map's own kind)."""
    kind = kind or m.kind
    if isinstance(m, SymmetricMap):
        if kind not in ("symmetric", "distance", "metric", "four_point"):
            raise UsageError(f"kind {kind!r} does not apply to a symmetric map")
        return _validate_symmetric(m, kind)
    if isinstance(m, DirectedMap):
        if kind not in ("directed", "directed_distance", "directed_metric"):
            raise UsageError(f"kind {kind!r} does not apply to a directed map")
        return _validate_directed(m, kind)
    if isinstance(m, Diversity):
        if kind != "diversity":
            raise UsageError(f"kind {kind!r} does not apply to a diversity")
        return _validate_diversity(m)
    if isinstance(m, KDissimilarity):
        return []
    raise UsageError(f"cannot validate {type(m).__name__}")


def monotonicity_violations(d: Diversity) -> list:
    out = []
    for A in d.subsets():
        for B in d.subsets():
            if A < B and d(A) > d(B):
                out.append((A, B))
    return out


# -- transforms ----------------------------------------------------------------------

def normalize_symmetric(D: SymmetricMap):
    """``D'(x, y) = D(x, y) - (D(x, x) + D(y, y)) / 2`` and the shift ``v(x) = D(x, x) / 2``."""
    v = QVector(D.ground, [HALF * D(x, x) for x in D.ground.labels])
    Dp = SymmetricMap(D.ground, lambda x, y: D(x, y) - HALF * (D(x, x) + D(y, y)))
    return Dp, v


def normalize_directed(D: DirectedMap):
    """Zero-diagonal version of a square directed map and its shift on ``X_d``."""
    if not D.square:
        raise PreconditionError("normalisation needs a map on X × X")
    g = directed_ground(D.X)
    v = QVector(g, [HALF * D(x, x) for x in D.X.labels] * 2)
    Dp = DirectedMap(D.X, lambda x, y: D(x, y) - HALF * (D(x, x) + D(y, y)))
    return Dp, v


def positive_part(D):
    """Pointwise ``max(0, D)``."""
    if isinstance(D, SymmetricMap):
        if any(D(x, x) != 0 for x in D.ground.labels):
            raise PreconditionError("positive part of a symmetric map needs a zero diagonal")
        return Distance(D.ground, lambda x, y: max(Fraction(0), D(x, y)))
    if isinstance(D, DirectedMap):
        return DirectedMap(D.X, lambda x, y: max(Fraction(0), D(x, y)), D.Y)
    raise UsageError(f"positive part is not defined for {type(D).__name__}")


def directed_ground(X: GroundSet) -> GroundSet:
    return GroundSet([left(x) for x in X.labels] + [right(x) for x in X.labels])


def undirect(D: DirectedMap) -> Distance:
    """The distance ``D^u`` on the two copies of X.

    The pair ``{x_l, y_r}`` gets ``D(x, y)``; pairs inside one copy get 0.
    """
    if not D.square:
        raise PreconditionError("undirect needs a directed map on X × X")
    g = directed_ground(D.X)

    def val(a, b):
        if a.endswith("_l") and b.endswith("_r"):
            return D(a[:-2], b[:-2])
        if a.endswith("_r") and b.endswith("_l"):
            return D(b[:-2], a[:-2])
        return 0
    return Distance(g, val)


def diversity_to_sym(d: Diversity) -> SymmetricMap:
    """``D_δ``: ``2 δ(A)`` on the diagonal and ``δ(A ∪ B)`` elsewhere, on nonempty subsets."""
    g = powerset_ground(d.ground)

    def val(a, b):
        A, B = parse_subset_label(a), parse_subset_label(b)
        return 2 * d(A) if A == B else d(A | B)
    return SymmetricMap(g, val)


def _powerset_labels(D: SymmetricMap) -> GroundSet:
    sets = [parse_subset_label(x) for x in D.ground.labels]
    Yg = GroundSet([next(iter(S)) for S in sets if len(S) == 1])
    if set(sets) != set(nonempty_subsets(Yg)):
        raise UsageError("map is not indexed by the nonempty subsets of a set")
    return Yg


def sym_to_diversity(D: SymmetricMap, Y: Optional[GroundSet] = None) -> Diversity:
    """``δ(D)(A) = D(A, A) / 2``."""
    Yg = _ground(Y) if Y is not None else _powerset_labels(D)
    label = {parse_subset_label(x): x for x in D.ground.labels}
    return Diversity(Yg, lambda S: HALF * D(label[S], label[S]))


def check_A1_A3(D: SymmetricMap) -> list:
    """Violations of the triangle inequality (A1), (A2) and the union rule (A3)."""
    out = []
    L = D.ground.labels
    for a, b, c in itertools.product(L, repeat=3):
        if D(a, b) + D(b, c) < D(a, c):
            out.append(f"(A1) fails for {a}, {b}, {c}")
    for a in L:
        if len(parse_subset_label(a)) == 1 and D(a, a) != 0:
            out.append(f"(A2) fails at {a}")
    index = {parse_subset_label(x): x for x in L}
    for i, a in enumerate(L):
        for b in L[i + 1:]:
            u = index[parse_subset_label(a) | parse_subset_label(b)]
            if D(a, b) != HALF * D(u, u):
                out.append(f"(A3) fails for {a}, {b}")
    return out


def diversity_distance(d: Diversity) -> Distance:
    """``d_δ(A, B) = max(0, δ(A ∪ B) - δ(A) - δ(B))`` for ``A ≠ B``, else 0."""
    g = powerset_ground(d.ground)

    def val(a, b):
        if a == b:
            return 0
        A, B = parse_subset_label(a), parse_subset_label(b)
        return max(Fraction(0), d(A | B) - d(A) - d(B))
    return Distance(g, val)


# -- weights -------------------------------------------------------------------------

def _support(p: QVector) -> list:
    """Labels in a 0/1/2 point, repeated by multiplicity."""
    out = []
    for lab, c in p.items():
        out.extend([lab] * int(c))
    return out


def make_weight(m, config: PointConfiguration) -> WeightFunction:
    """The weight function on ``config`` whose envelope encodes ``m``.

    Every weight follows the envelope convention ``<a, x> >= -w(a)``; in
    particular the cube weight of a diversity is ``-δ(∪𝒜)``.
    """
    kind = config.kind
    if isinstance(m, SymmetricMap):
        if kind not in ("A", "A_bar") or config.ground != m.ground:
            raise UsageError("symmetric maps live on A(X) or Ā(X) over the same ground set")
        vals = []
        for p in config.points:
            s = _support(p)
            vals.append(-m(s[0], s[-1]))
        return WeightFunction(config, tuple(vals))
    if isinstance(m, DirectedMap):
        if m.square:
            if kind not in ("B_directed", "B_bar_directed") or config.X != m.X:
                raise UsageError("maps on X × X live on the directed configurations of X")
            def val(s):
                a, b = s
                if a.endswith("_l") and b.endswith("_r"):
                    return -m(a[:-2], b[:-2])
                if a.endswith("_r") and b.endswith("_l"):
                    return -m(b[:-2], a[:-2])
                return Fraction(0)
        else:
            if kind not in ("B", "B_bar") or config.X != m.X or config.Y != m.Y:
                raise UsageError("maps on X × Y live on B(X, Y) or B̄(X, Y)")
            xs = set(m.X.labels)
            def val(s):
                a, b = s
                if a in xs and b not in xs:
                    return -m(a, b)
                if b in xs and a not in xs:
                    return -m(b, a)
                return Fraction(0)
        return WeightFunction(config, tuple(val(_support(p)) for p in config.points))
    if isinstance(m, Diversity):
        if kind == "C_cube":
            if config.X != m.ground:
                raise UsageError("cube configuration over a different ground set")
            vals = []
            for p in config.points:
                union = frozenset()
                for lab in _support(p):
                    union |= parse_subset_label(lab)
                vals.append(-m(union))
            return WeightFunction(config, tuple(vals))
        if kind == "A":
            return make_weight(diversity_to_sym(m), config)
        raise UsageError("diversities live on the cube C(P⁰(Y)) or on A(P⁰(Y))")
    if isinstance(m, KDissimilarity):
        if kind != "hypersimplex" or config.k != m.k or config.X != m.ground:
            raise UsageError("k-dissimilarities live on the matching hypersimplex")
        return WeightFunction(config, tuple(-m(_support(p)) for p in config.points))
    raise UsageError(f"no weight function for {type(m).__name__}")
