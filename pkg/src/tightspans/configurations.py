"""Point configurations, their faces and edges, splits and split compatibility.

Points carry string labels.  For configurations of sums of unit vectors the
label spells the sum, e.g. ``"1+2"`` for ``e_1 + e_2`` and ``"1+1"`` for
``2 e_1``; cube points use ``"0"`` for the origin.  Nonempty subsets used as
coordinates are written ``"{1,2}"``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import EnumerationCapError, UsageError
from .exact import (GroundSet, QVector, Q, format_rational, integer_row, lp_solve,
                    natural_key, nullspace, rank, rref)
from .polyhedron import dd_cone

KINDS = ("A", "A_bar", "B", "B_bar", "B_directed", "B_bar_directed", "C_cube",
         "hypersimplex")

BRUTE_FORCE_LIMIT = 200_000


# -- subset labels -------------------------------------------------------------

def subset_label(subset: Iterable, order: Optional[GroundSet] = None) -> str:
    items = [str(x) for x in subset]
    if order is not None:
        items.sort(key=order.index)
    else:
        items.sort(key=natural_key)
    return "{" + ",".join(items) + "}"


def parse_subset_label(text: str) -> frozenset:
    s = text.strip()
    if s.startswith("{") and s.endswith("}"):
        s = s[1:-1]
    return frozenset(p.strip() for p in s.split(",") if p.strip())


def nonempty_subsets(ground: GroundSet) -> list:
    """Nonempty subsets ordered by size, then lexicographically in ground order."""
    labels = ground.labels
    out = []
    for k in range(1, len(labels) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(labels, k))
    return out


def powerset_ground(Y: GroundSet) -> GroundSet:
    return GroundSet([subset_label(s, Y) for s in nonempty_subsets(Y)])


def left(x) -> str:
    return f"{x}_l"


def right(x) -> str:
    return f"{x}_r"


# -- configurations --------------------------------------------------------------

@dataclass(frozen=True)
class PointConfiguration:
    kind: str
    ground: GroundSet
    labels: tuple
    points: tuple
    X: Optional[GroundSet] = None
    Y: Optional[GroundSet] = None
    k: Optional[int] = None

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise UsageError("point labels must be distinct")
        if len(set(self.points)) != len(self.points):
            raise UsageError("configuration points must be distinct")
        object.__setattr__(self, "_index", {l: i for i, l in enumerate(self.labels)})

    def __len__(self) -> int:
        return len(self.points)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UsageError(f"no point labelled {label!r}") from None

    def point(self, label: str) -> QVector:
        return self.points[self.index(label)]

    def items(self):
        return zip(self.labels, self.points)

    @property
    def is_directed(self) -> bool:
        return self.kind in ("B_directed", "B_bar_directed")

    def affine_dimension(self) -> int:
        p0 = self.points[0].coords
        return rank([[a - b for a, b in zip(p.coords, p0)] for p in self.points[1:]] or [[0]])

    def to_json(self) -> dict:
        out = {"kind": self.kind, "ground": list(self.ground.labels),
               "points": {l: p.to_json() for l, p in self.items()}}
        if self.k is not None:
            out["k"] = self.k
        return out


def _sum_point(ground: GroundSet, labels: Sequence[str]) -> QVector:
    c = [0] * len(ground)
    for x in labels:
        c[ground.index(x)] += 1
    return QVector(ground, c)


def _pairs(ground: GroundSet, allowed, diagonal: bool) -> tuple:
    labels, points = [], []
    L = ground.labels
    for i, x in enumerate(L):
        for j in range(i, len(L)):
            y = L[j]
            if i == j and not diagonal:
                continue
            if i != j and not allowed(x, y):
                continue
            labels.append(f"{x}+{y}")
            points.append(_sum_point(ground, (x, y)))
    return tuple(labels), tuple(points)


def build_configuration(kind: str, X, Y=None, k: Optional[int] = None) -> PointConfiguration:
    """Construct one of the configurations A, Ā, B, B̄, directed B/B̄, cube, hypersimplex."""
    if kind not in KINDS:
        raise UsageError(f"unknown configuration kind {kind!r}")
    X = X if isinstance(X, GroundSet) else GroundSet(X)
    if Y is not None and not isinstance(Y, GroundSet):
        Y = GroundSet(Y)
    if kind in ("A", "A_bar"):
        labels, points = _pairs(X, lambda x, y: True, kind == "A")
        return PointConfiguration(kind, X, labels, points, X=X)
    if kind in ("B", "B_bar"):
        if Y is None:
            raise UsageError(f"{kind} needs a second ground set Y")
        if set(X.labels) & set(Y.labels):
            raise UsageError("X and Y must be disjoint")
        ground = GroundSet(X.labels + Y.labels)
        xs = set(X.labels)
        labels, points = _pairs(ground, lambda a, b: (a in xs) != (b in xs), kind == "B")
        return PointConfiguration(kind, ground, labels, points, X=X, Y=Y)
    if kind in ("B_directed", "B_bar_directed"):
        if Y is not None:
            raise UsageError("directed configurations build their own copy of X")
        ground = GroundSet([left(x) for x in X] + [right(x) for x in X])
        lefts = {left(x) for x in X}
        labels, points = _pairs(ground, lambda a, b: (a in lefts) != (b in lefts),
                                kind == "B_directed")
        return PointConfiguration(kind, ground, labels, points, X=X)
    if kind == "C_cube":
        ground = powerset_ground(X)
        labels, points = [], []
        n = len(ground)
        for r in range(n + 1):
            for combo in itertools.combinations(ground.labels, r):
                labels.append("+".join(combo) if combo else "0")
                points.append(_sum_point(ground, combo))
        return PointConfiguration(kind, ground, tuple(labels), tuple(points), X=X)
    # hypersimplex
    if k is None or not 2 <= k <= len(X):
        raise UsageError(f"hypersimplex needs 2 <= k <= |X|, got k={k}")
    labels, points = [], []
    for combo in itertools.combinations(X.labels, k):
        labels.append("+".join(combo))
        points.append(_sum_point(X, combo))
    return PointConfiguration(kind, X, tuple(labels), tuple(points), X=X, k=k)


# -- faces and edges ---------------------------------------------------------------

def _affine_directions(points: Sequence[QVector]) -> list:
    """Reduced basis of the linear space parallel to the affine hull."""
    p0 = points[0].coords
    diffs = [[a - b for a, b in zip(p.coords, p0)] for p in points[1:]]
    diffs = [d for d in diffs if any(d)]
    if not diffs:
        return []
    M, piv = rref(diffs, len(p0))
    return [r for r in M[:len(piv)]]


def configuration_faces(points: Sequence[QVector]) -> set:
    """All nonempty faces of a point set, as frozensets of point indices.

    Facets come from the extreme rays of the cone of affine functionals that
    are nonnegative on every point; faces are their intersections.
    """
    rows = [integer_row([Fraction(1)] + list(p.coords)) for p in points]
    ncols = len(rows[0])
    rays, _ = dd_cone([], rows, ncols)
    facets = set()
    for r in rays:
        tight = frozenset(i for i, row in enumerate(rows)
                          if sum(x * y for x, y in zip(r, row)) == 0)
        if len(tight) < len(points):
            facets.add(tight)
    faces = {frozenset(range(len(points)))}
    frontier = set(faces)
    while frontier:
        nxt = set()
        for f in frontier:
            for g in facets:
                h = f & g
                if h and h not in faces:
                    faces.add(h)
                    nxt.add(h)
        frontier = nxt
    return faces


def config_edges(A: PointConfiguration) -> list:
    """Pairs of labels forming a face of size two, decided by an LP each.

    A pair ``{p, q}`` is an edge iff some affine functional vanishes on both
    and is at least 1 on every other point.
    """
    n = len(A)
    dim = len(A.ground)
    edges = []
    zero = [0] * (dim + 1)
    for i in range(n):
        for j in range(i + 1, n):
            cons, eqs = [], []
            for m, p in enumerate(A.points):
                row = list(p.coords) + [Fraction(-1)]
                if m in (i, j):
                    eqs.append((row, 0))
                else:
                    cons.append((row, 1))
            if lp_solve(cons, zero, "min", equalities=eqs).optimal:
                edges.append((A.labels[i], A.labels[j]))
    return edges


# -- splits ------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitTag:
    """Combinatorial description of a split.

    ``kind`` is ``"partial"`` for the unordered partial split ``{A, B}`` of X
    behind a split of A(X), ``"pair"`` for the sets ``A ⊊ X``, ``B ⊊ Y`` behind
    a split of B̄(X, Y) and ``"directed"`` for a directed partial split of X
    on one of the directed configurations.
    """

    kind: str
    A: frozenset
    B: frozenset

    def describe(self, order=None) -> str:
        a, b = subset_label(self.A, order), subset_label(self.B, order)
        if self.kind == "partial":
            return f"{a[1:-1]}|{b[1:-1]}"
        return f"({a},{b})"


@dataclass(frozen=True)
class ConfigSplit:
    plus: frozenset
    minus: frozenset
    normal: QVector
    rhs: Fraction
    tag: Optional[SplitTag] = None

    @property
    def key(self) -> frozenset:
        return frozenset((self.plus, self.minus))

    def same_split(self, other: "ConfigSplit") -> bool:
        return self.key == other.key

    def to_json(self, config: Optional[PointConfiguration] = None) -> dict:
        order = (lambda s: sorted(s, key=config.index)) if config else sorted
        out = {"plus": order(self.plus), "minus": order(self.minus),
               "normal": self.normal.to_json(), "rhs": format_rational(self.rhs)}
        if self.tag is not None:
            out["tag"] = {"kind": self.tag.kind,
                          "A": sorted(self.tag.A, key=natural_key),
                          "B": sorted(self.tag.B, key=natural_key)}
        return out


def _split_from_hyperplane(A: PointConfiguration, normal: QVector, rhs, tag=None):
    vals = [normal.dot(p) - rhs for p in A.points]
    plus = frozenset(l for l, v in zip(A.labels, vals) if v >= 0)
    minus = frozenset(l for l, v in zip(A.labels, vals) if v <= 0)
    return ConfigSplit(plus, minus, normal, Q(rhs), tag)


def _indicator(A: PointConfiguration, pos: Iterable, neg: Iterable) -> QVector:
    c = [0] * len(A.ground)
    for x in pos:
        c[A.ground.index(x)] += 1
    for x in neg:
        c[A.ground.index(x)] -= 1
    return QVector(A.ground, c)


def split_from_partial_split(A: PointConfiguration, S, T) -> ConfigSplit:
    """The split of A(X) with hyperplane ``sum_S f = sum_T f``."""
    S, T = frozenset(map(str, S)), frozenset(map(str, T))
    if not S or not T or S & T:
        raise UsageError("a partial split needs two disjoint nonempty sets")
    if A.kind not in ("A", "A_bar"):
        raise UsageError("partial splits of X index splits of A(X)")
    first, second = sorted((S, T), key=lambda s: sorted(A.X.index(x) for x in s))
    return _split_from_hyperplane(A, _indicator(A, first, second), 0,
                                  SplitTag("partial", first, second))


def _canonical_pair(X: GroundSet, Y: GroundSet, S: frozenset, T: frozenset):
    comp = (frozenset(X.labels) - S, frozenset(Y.labels) - T)
    key = lambda p: sorted(X.index(x) for x in p[0])
    return min((S, T), comp, key=key)


def split_from_pair(A: PointConfiguration, S, T) -> ConfigSplit:
    """The split of B̄(X, Y) with hyperplane ``sum_S f = sum_T f`` (S ⊊ X, T ⊊ Y).

    ``(S, T)`` and its complement pair define the same split; the tag holds
    the representative with the lexicographically smaller first set.
    """
    if A.kind != "B_bar":
        raise UsageError("pairs (S, T) index splits of B̄(X, Y)")
    S, T = frozenset(map(str, S)), frozenset(map(str, T))
    if not S or not T or S >= frozenset(A.X.labels) or T >= frozenset(A.Y.labels):
        raise UsageError("need nonempty proper subsets S of X and T of Y")
    if not S <= frozenset(A.X.labels) or not T <= frozenset(A.Y.labels):
        raise UsageError("S must lie in X and T in Y")
    S, T = _canonical_pair(A.X, A.Y, S, T)
    return _split_from_hyperplane(A, _indicator(A, S, T), 0, SplitTag("pair", S, T))


def split_from_directed(A: PointConfiguration, S, T) -> ConfigSplit:
    """Split of a directed configuration induced by the directed partial split ``(S, T)``.

    The hyperplane is ``sum_{x in S} f(x_l) = sum_{y in T} f(y_r)``; the tag
    keeps ``(S, T)`` as given, in terms of the labels of X.
    """
    if not A.is_directed:
        raise UsageError("directed partial splits index splits of B(X) and B̄(X)")
    S, T = frozenset(map(str, S)), frozenset(map(str, T))
    if not S or not T or S & T:
        raise UsageError("a directed partial split needs two disjoint nonempty sets")
    Xs = frozenset(A.X.labels)
    if not (S | T) <= Xs:
        raise UsageError("directed partial split outside the ground set")
    normal = _indicator(A, [left(x) for x in S], [right(y) for y in T])
    return _split_from_hyperplane(A, normal, 0, SplitTag("directed", S, T))


def _split_sort_key(A: PointConfiguration, s: ConfigSplit):
    sides = sorted(tuple(sorted(A.index(l) for l in side)) for side in (s.plus, s.minus))
    return tuple(sides)


def brute_force_splits(A: PointConfiguration, limit: int = BRUTE_FORCE_LIMIT) -> list:
    """Splits found by trying every hyperplane spanned by configuration points.

    A hyperplane of the affine hull is a split iff it has points strictly on
    both sides and separates no edge.  Untagged; deterministic order.
    """
    pts = A.points
    W = _affine_directions(pts)
    m = len(W)
    if m == 0:
        return []
    count = math.comb(len(pts), m)
    if count > limit:
        raise EnumerationCapError(
            f"brute-force split search would test {count} point subsets (limit {limit})")
    edges = [(A.index(p), A.index(q)) for p, q in config_edges(A)]
    found = {}
    for subset in itertools.combinations(range(len(pts)), m):
        s0 = pts[subset[0]]
        diffs = [[a - b for a, b in zip(pts[i].coords, s0.coords)] for i in subset[1:]]
        # normal l = sum mu_j W_j, orthogonal to the spanning differences
        rows = [[sum(w * d for w, d in zip(Wj, dv)) for Wj in W] for dv in diffs]
        ker = nullspace(rows, m) if rows else nullspace([], m)
        if len(ker) != 1:
            continue
        mu = ker[0]
        lvec = [sum(mu[j] * W[j][c] for j in range(m)) for c in range(len(A.ground))]
        lint = integer_row(lvec)
        normal = QVector(A.ground, lint)
        rhs = normal.dot(s0)
        vals = [normal.dot(p) - rhs for p in pts]
        if not any(v > 0 for v in vals) or not any(v < 0 for v in vals):
            continue
        if any(vals[i] * vals[j] < 0 for i, j in edges):
            continue
        split = _split_from_hyperplane(A, normal, rhs)
        found.setdefault(split.key, split)
    return sorted(found.values(), key=lambda s: _split_sort_key(A, s))


def partial_splits(X: GroundSet) -> list:
    """Unordered pairs ``{S, T}`` of disjoint nonempty subsets, canonically ordered."""
    out = []
    subs = nonempty_subsets(X)
    for S in subs:
        for T in subs:
            if S & T:
                continue
            key = lambda s: sorted(X.index(x) for x in s)
            if key(S) < key(T):
                out.append((S, T))
    return out


def directed_partial_splits(X: GroundSet) -> list:
    subs = nonempty_subsets(X)
    return [(S, T) for S in subs for T in subs if not S & T]


def enumerate_splits(A: PointConfiguration, brute_force: bool = False) -> list:
    """All splits of ``A``.

    Closed forms are used for A(X) and B̄(X, Y); other kinds need
    ``brute_force=True`` and are subject to the brute-force size guard.
    """
    if A.kind == "A":
        splits = [split_from_partial_split(A, S, T) for S, T in partial_splits(A.X)]
    elif A.kind == "B_bar":
        seen = {}
        for S in nonempty_subsets(A.X)[:-1]:
            for T in nonempty_subsets(A.Y)[:-1]:
                s = split_from_pair(A, S, T)
                seen.setdefault(s.key, s)
        splits = list(seen.values())
    elif brute_force:
        return brute_force_splits(A)
    else:
        raise UsageError(f"no closed-form split enumeration for kind {A.kind}; "
                         "pass brute_force=True")
    return sorted(splits, key=lambda s: _split_sort_key(A, s))


# -- compatibility -------------------------------------------------------------------

def _relint_hits(A: PointConfiguration, hyperplanes) -> bool:
    """Whether all given hyperplanes meet the relative interior of conv A."""
    n = len(A)
    # variables: lambda_1..lambda_n, t
    cons = []
    for i in range(n):
        row = [0] * (n + 1)
        row[i] = 1
        row[n] = -1
        cons.append((row, 0))
    eqs = [([1] * n + [0], 1)]
    for normal, rhs in hyperplanes:
        eqs.append(([normal.dot(p) for p in A.points] + [0], rhs))
    obj = [0] * n + [1]
    res = lp_solve(cons, obj, "max", equalities=eqs)
    if res.status == "infeasible":
        return False
    if res.status == "unbounded":
        raise AssertionError("relative interior LP cannot be unbounded")
    return res.value > 0


def _chain(a, b, c, d) -> bool:
    return (a <= c and b >= d) or (a >= c and b <= d)


def tags_compatible(A: PointConfiguration, s: SplitTag, t: SplitTag) -> bool:
    if s.kind != t.kind:
        raise UsageError("cannot compare splits with different tag kinds")
    if s.kind == "partial":
        return _chain(s.A, s.B, t.A, t.B) or _chain(s.A, s.B, t.B, t.A)
    if s.kind == "pair":
        Xs, Ys = frozenset(A.X.labels), frozenset(A.Y.labels)
    elif A.kind == "B_bar_directed":
        Xs = Ys = frozenset(A.X.labels)
    else:
        # B(X): the doubled points rule out the complement cases
        return _chain(s.A, s.B, t.A, t.B)
    return _chain(s.A, s.B, t.A, t.B) or _chain(Xs - s.A, Ys - s.B, t.A, t.B)


def splits_compatible(A: PointConfiguration, S: ConfigSplit, T: ConfigSplit,
                      method: str = "geometric") -> bool:
    """Whether two splits of ``A`` are compatible.

    ``geometric`` tests by LP whether the two split hyperplanes meet inside
    the relative interior of conv A; ``combinatorial`` evaluates the
    containment conditions on the tags.  A split counts as compatible with
    itself.
    """
    if S.same_split(T):
        return True
    if method == "geometric":
        return not _relint_hits(A, [(S.normal, S.rhs), (T.normal, T.rhs)])
    if method == "combinatorial":
        if S.tag is None or T.tag is None:
            raise UsageError("combinatorial compatibility needs tagged splits")
        return tags_compatible(A, S.tag, T.tag)
    raise UsageError(f"unknown method {method!r}")


def hyperplane_meets_interior(A: PointConfiguration, normal: QVector, rhs) -> bool:
    return _relint_hits(A, [(normal, Q(rhs))])


# -- weights -------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightFunction:
    """A rational value per configuration point, aligned with ``config.points``."""

    config: PointConfiguration
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.config):
            raise UsageError("weight function must assign a value to every point")
        object.__setattr__(self, "values", tuple(Q(v) for v in self.values))

    @classmethod
    def from_mapping(cls, config: PointConfiguration, mapping) -> "WeightFunction":
        missing = [l for l in config.labels if l not in mapping]
        if missing:
            raise UsageError(f"weights missing for points {missing[:5]}")
        return cls(config, tuple(Q(mapping[l]) for l in config.labels))

    def __getitem__(self, label: str) -> Fraction:
        return self.values[self.config.index(label)]

    def items(self):
        return zip(self.config.labels, self.values)

    def __add__(self, other: "WeightFunction") -> "WeightFunction":
        if other.config != self.config:
            raise UsageError("weights on different configurations")
        return WeightFunction(self.config, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "WeightFunction") -> "WeightFunction":
        return self + other * -1

    def __mul__(self, s) -> "WeightFunction":
        s = Q(s)
        return WeightFunction(self.config, tuple(s * v for v in self.values))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (isinstance(other, WeightFunction) and self.config == other.config
                and self.values == other.values)

    def __hash__(self) -> int:
        return hash(self.values)

    def to_json(self) -> dict:
        return {l: format_rational(v) for l, v in self.items()}


def split_weight(A: PointConfiguration, S: ConfigSplit) -> WeightFunction:
    """``w(a) = max(0, <l, a> - c)`` for the split hyperplane oriented towards ``S.plus``."""
    return WeightFunction(A, tuple(max(Fraction(0), S.normal.dot(p) - S.rhs) for p in A.points))


# -- subdivisions ---------------------------------------------------------------------

@dataclass(frozen=True)
class Subdivision:
    cells: tuple  # frozensets of point labels
    weights: Optional[WeightFunction] = None

    def maximal_cells(self) -> list:
        return [c for c in self.cells if not any(c < d for d in self.cells)]


def _relint_overlap(points_f, points_g) -> bool:
    nf, ng = len(points_f), len(points_g)
    d = len(points_f[0])
    nv = nf + ng + 1
    cons = []
    for i in range(nf + ng):
        row = [0] * nv
        row[i] = 1
        row[-1] = -1
        cons.append((row, 0))
    eqs = [([1] * nf + [0] * ng + [0], 1), ([0] * nf + [1] * ng + [0], 1)]
    for c in range(d):
        row = [p.coords[c] for p in points_f] + [-p.coords[c] for p in points_g] + [0]
        eqs.append((row, 0))
    res = lp_solve(cons, [0] * (nv - 1) + [1], "max", equalities=eqs)
    return res.optimal and res.value > 0


def check_subdivision(A: PointConfiguration, cells: Iterable) -> list:
    """Violations of the three subdivision axioms (empty list if none).

    Face closure and disjointness of relative interiors are checked
    directly.  Covering is checked through the facets of the maximal cells:
    every maximal cell must be full-dimensional, and each of its facets must
    either lie in the boundary of conv A or be shared with another maximal
    cell.
    """
    cells = [frozenset(c) for c in cells]
    cellset = set(cells)
    out = []
    faces_of = {}
    for c in cells:
        pts = [A.point(l) for l in sorted(c, key=A.index)]
        labs = sorted(c, key=A.index)
        faces = {frozenset(labs[i] for i in f) for f in configuration_faces(pts)}
        faces_of[c] = faces
        for f in faces:
            if f not in cellset:
                out.append(f"SD1: face {sorted(f, key=A.index)} of a cell is not a cell")
    for i, c in enumerate(cells):
        for d in cells[i + 1:]:
            pc = [A.point(l) for l in c]
            pd = [A.point(l) for l in d]
            if _relint_overlap(pc, pd):
                out.append(f"SD3: relative interiors of {sorted(c, key=A.index)} and "
                           f"{sorted(d, key=A.index)} meet")
    full = A.affine_dimension()
    maximal = [c for c in cells if not any(c < d for d in cells)]
    boundary = [f for f in configuration_faces(list(A.points)) if len(f) < len(A)]
    boundary = [frozenset(A.labels[i] for i in f) for f in boundary]

    def dim(c):
        pts = [A.point(l) for l in c]
        p0 = pts[0].coords
        return rank([[a - b for a, b in zip(p.coords, p0)] for p in pts[1:]] or [[0]])

    for c in maximal:
        if dim(c) != full:
            out.append(f"SD2: maximal cell {sorted(c, key=A.index)} is not full-dimensional")
            continue
        for f in faces_of[c]:
            if f == c or dim(f) != full - 1:
                continue
            if any(f <= b for b in boundary):
                continue
            if not any(d != c and f in faces_of[d] for d in maximal):
                out.append(f"SD2: facet {sorted(f, key=A.index)} is interior but unshared")
    return out
