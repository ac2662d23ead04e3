"""Envelopes, tight-spans, regular subdivisions and split decompositions.

For a configuration ``A`` and weights ``w`` the envelope is
``E = {x : <a, x> >= -w(a) for all a in A}`` and the tight-span is the
complex of its bounded faces.  The regular subdivision induced by ``w`` is
computed twice, from the envelope (cells are tight point sets of faces) and
from the lifted point set (lower faces found by a separate double
description run), so that the duality between the two can be checked.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .configurations import (ConfigSplit, PointConfiguration, SplitTag, WeightFunction,
                             _split_from_hyperplane, _split_sort_key, brute_force_splits,
                             build_configuration, configuration_faces, directed_partial_splits,
                             enumerate_splits, powerset_ground, split_from_directed,
                             split_weight, splits_compatible)
from .errors import EnumerationCapError, InvariantError, UsageError
from .exact import QVector, format_rational, integer_row, rank, solve_linear
from .maps import (Diversity, DirectedMap, KDissimilarity, SymmetricMap, make_weight)
from .polyhedron import (DEFAULT_CAP, BoundedComplex, HPolyhedron, VRepresentation,
                         bounded_complex, dd_convert, dd_cone, face_lattice,
                         is_bounded_from_below, is_minimal_element)


def envelope(A: PointConfiguration, w: WeightFunction) -> HPolyhedron:
    """One inequality ``<a, x> >= -w(a)`` per point, in configuration order."""
    if w.config != A:
        raise UsageError("weight function belongs to another configuration")
    return HPolyhedron(A.ground, tuple((p, -v) for p, v in zip(A.points, w.values)))


@dataclass(frozen=True)
class TightSpan:
    config: PointConfiguration
    weights: WeightFunction
    polyhedron: HPolyhedron
    vrep: VRepresentation
    complex: BoundedComplex
    name: str = "T(w, A)"
    notes: tuple = ()

    @property
    def dimension(self) -> int:
        return self.complex.dimension

    @property
    def vertices(self) -> tuple:
        return self.complex.vertices

    def to_json(self) -> dict:
        out = self.complex.to_json()
        out["object"] = self.name
        out["dimension"] = self.dimension
        if self.vrep.lineality:
            out["lineality"] = [l.to_json() for l in self.vrep.lineality]
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def tight_span(A: PointConfiguration, w: WeightFunction, cap: int = DEFAULT_CAP,
               check_minimal: bool = False, name: str = "T(w, A)",
               notes: tuple = ()) -> TightSpan:
    """Bounded-face complex of the envelope.

    When the envelope contains lines (configurations whose affine hull has
    codimension above one) the lines are factored out first.  With
    ``check_minimal`` every complex vertex is run through the minimality LP
    whenever the envelope is bounded from below.
    """
    P = envelope(A, w)
    V = dd_convert(P, cap=cap)
    C = bounded_complex(P, V, modulo_lineality=True)
    ts = TightSpan(A, w, P, V, C, name, tuple(notes))
    if check_minimal and is_bounded_from_below(P, V):
        for v in C.vertices:
            if not is_minimal_element(P, v):
                raise InvariantError(f"tight-span vertex {v!r} is not minimal")
    return ts


def minimal_vertices(ts: TightSpan) -> set:
    """Envelope vertices that pass the minimality LP."""
    return {v for v in ts.vrep.vertices if is_minimal_element(ts.polyhedron, v)}


def complex_vertices(ts: TightSpan) -> set:
    used = set()
    for f in ts.complex.faces:
        used |= f.vertex_ids
    return {ts.complex.vertices[i] for i in used}


# -- shifts ------------------------------------------------------------------------

def shift_weight(w: WeightFunction, v: QVector) -> WeightFunction:
    """``w'(a) = w(a) + <a, v>``."""
    return WeightFunction(w.config, tuple(x + p.dot(v) for x, p in zip(w.values, w.config.points)))


def check_shift(A: PointConfiguration, w: WeightFunction, v: QVector) -> bool:
    """Whether the vertex sets satisfy ``T_w = T_{w'} + v``."""
    t = tight_span(A, w)
    t2 = tight_span(A, shift_weight(w, v))
    if t.vrep.lineality or t2.vrep.lineality:
        raise UsageError("shift check compares vertex sets of pointed envelopes only")
    return complex_vertices(t) == {x + v for x in complex_vertices(t2)}


# -- regular subdivisions ------------------------------------------------------------

@dataclass(frozen=True)
class RegularSubdivision:
    cells: tuple      # frozensets of point labels, sorted
    interior: tuple   # flag per cell
    weights: Optional[WeightFunction] = None

    def maximal_cells(self) -> list:
        return [c for c in self.cells if not any(c < d for d in self.cells)]

    def interior_cells(self) -> list:
        return [c for c, f in zip(self.cells, self.interior) if f]

    def to_json(self, config: PointConfiguration) -> dict:
        order = lambda c: sorted(c, key=config.index)
        return {"cells": [order(c) for c in self.cells],
                "interior": list(self.interior)}


def _boundary_facets(A: PointConfiguration) -> list:
    faces = configuration_faces(list(A.points))
    n = len(A)
    proper = [f for f in faces if len(f) < n]
    maximal = [f for f in proper if not any(f < g for g in proper)]
    return [frozenset(A.labels[i] for i in f) for f in maximal]


def _cell_sort(A: PointConfiguration, cells) -> list:
    return sorted(cells, key=lambda c: (-len(c), sorted(A.index(l) for l in c)))


def _lifting_cells(A: PointConfiguration, w: WeightFunction) -> set:
    """Lower faces of the lifted point set, via the facets of its homogenized cone."""
    rows = [integer_row([Fraction(1), v] + list(p.coords)) for p, v in zip(A.points, w.values)]
    ncols = len(rows[0])
    up = [0, 1] + [0] * (ncols - 2)
    rays, _ = dd_cone([], rows + [up], ncols)
    n = len(A)
    lower, other = [], []
    for r in rays:
        tight = frozenset(i for i, row in enumerate(rows)
                          if sum(x * y for x, y in zip(r, row)) == 0)
        if len(tight) == n or not tight:
            continue
        (lower if r[1] > 0 else other).append(tight)
    if not lower:
        # a constant lift: the only lower face is the whole configuration
        return {frozenset(A.labels)}
    cells = set(lower)
    frontier = set(lower)
    facets = lower + other
    while frontier:
        nxt = set()
        for c in frontier:
            for f in facets:
                h = c & f
                if h and h not in cells:
                    cells.add(h)
                    nxt.add(h)
        frontier = nxt
    return {frozenset(A.labels[i] for i in c) for c in cells}


def _envelope_cells(A: PointConfiguration, w: WeightFunction, cap: int) -> set:
    P = envelope(A, w)
    V = dd_convert(P, cap=cap)
    L = face_lattice(P, V)
    cells = {frozenset(A.labels[i] for i in f.active) for f in L.faces}
    cells.discard(frozenset())
    return cells, P, V, L


def _on_affine_hyperplane(A: PointConfiguration) -> bool:
    """Whether some linear functional is identically 1 on the configuration."""
    rows = [list(p.coords) for p in A.points]
    res = solve_linear([[r[j] for j in range(len(A.ground))] for r in rows], [1] * len(rows))
    return res is not None


def regular_subdivision(A: PointConfiguration, w: WeightFunction, method: str = "lifting",
                        cap: int = DEFAULT_CAP) -> RegularSubdivision:
    """Cells of the subdivision induced by ``w`` with interior flags.

    ``lifting`` computes the lower faces of ``conv{(w(a), a)} + R(1, 0)``;
    ``envelope`` reads cells off the faces of the envelope, which requires
    the configuration to lie on an affine hyperplane missing the origin.
    """
    if method == "lifting":
        cells = _lifting_cells(A, w)
    elif method == "envelope":
        if not _on_affine_hyperplane(A):
            raise UsageError("envelope route needs a configuration on an affine hyperplane "
                             "avoiding the origin; use the lifting route")
        cells = _envelope_cells(A, w, cap)[0]
    else:
        raise UsageError(f"unknown subdivision method {method!r}")
    boundary = _boundary_facets(A)
    ordered = _cell_sort(A, cells)
    flags = tuple(not any(c <= b for b in boundary) for c in ordered)
    return RegularSubdivision(tuple(ordered), flags, w)


def maximal_cells(A: PointConfiguration, w: WeightFunction, cap: int = DEFAULT_CAP) -> list:
    """Maximal cells of the subdivision: tight sets of the envelope's vertices."""
    if not _on_affine_hyperplane(A):
        return regular_subdivision(A, w).maximal_cells()
    P = envelope(A, w)
    V = dd_convert(P, cap=cap)
    cells = set()
    for v in V.vertices:
        cells.add(frozenset(l for l, (a, b) in zip(A.labels, P.inequalities) if a.dot(v) == b))
    return _cell_sort(A, cells)


# -- duality -------------------------------------------------------------------------

@dataclass
class DualityReport:
    ok: bool
    pairs: list = field(default_factory=list)   # (face vertex ids, cell labels)
    problems: list = field(default_factory=list)
    maximal_faces: int = 0
    minimal_interior_cells: int = 0

    def to_json(self, config: PointConfiguration) -> dict:
        return {"ok": self.ok,
                "maximal_tightspan_faces": self.maximal_faces,
                "minimal_interior_cells": self.minimal_interior_cells,
                "pairs": [{"face": sorted(f), "cell": sorted(c, key=config.index)}
                          for f, c in self.pairs],
                "problems": self.problems}


def _affdim(A: PointConfiguration, labels) -> int:
    return rank([[1] + list(A.point(l).coords) for l in labels]) - 1


def verify_duality(A: PointConfiguration, w: WeightFunction, cap: int = DEFAULT_CAP) -> DualityReport:
    """Check that bounded envelope faces and interior lifting cells are anti-isomorphic.

    The map sends a bounded face to the set of points tight on it.  It must
    be a bijection onto the interior cells computed from the lifting,
    reverse inclusion in both directions, and send ``k``-faces to cells of
    affine dimension ``dim aff A - k``.
    """
    ts = tight_span(A, w, cap=cap)
    sub = regular_subdivision(A, w, "lifting")
    interior = set(sub.interior_cells())
    rep = DualityReport(True)
    faces = ts.complex.faces
    cell_of = []
    for f in faces:
        c = frozenset(A.labels[i] for i in f.active)
        cell_of.append(c)
        rep.pairs.append((f.vertex_ids, c))
    image = set(cell_of)
    if len(image) != len(faces):
        rep.problems.append("two bounded faces share a tight set")
    if image != interior:
        missing = interior - image
        extra = image - interior
        rep.problems.append(f"{len(missing)} interior cells without a face, "
                            f"{len(extra)} faces without an interior cell")
    full = A.affine_dimension()
    for f, c in zip(faces, cell_of):
        if _affdim(A, c) != full - f.dim:
            rep.problems.append(f"face {sorted(f.vertex_ids)} of dim {f.dim} maps to a cell "
                                f"of dim {_affdim(A, c)}")
    for i, f in enumerate(faces):
        for j, g in enumerate(faces):
            if i == j:
                continue
            if (f.vertex_ids <= g.vertex_ids) != (cell_of[i] >= cell_of[j]):
                rep.problems.append(f"order not reversed between faces {i} and {j}")
    maxf = [f for f in faces if not any(f.vertex_ids < g.vertex_ids for g in faces)]
    mincells = [c for c in interior if not any(d < c for d in interior)]
    rep.maximal_faces = len(maxf)
    rep.minimal_interior_cells = len(mincells)
    if rep.maximal_faces != rep.minimal_interior_cells:
        rep.problems.append("maximal face and minimal interior cell counts differ")
    rep.ok = not rep.problems
    return rep


# -- trees ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExtractedTree:
    vertices: tuple
    edges: tuple  # (i, j, vector, length)

    def to_json(self) -> dict:
        return {"vertices": [v.to_json() for v in self.vertices],
                "edges": [{"source": i, "target": j, "len": format_rational(l)}
                          for i, j, _, l in self.edges]}


def max_norm(v: QVector) -> Fraction:
    return max((abs(c) for c in v.coords), default=Fraction(0))


def is_tree(ts: TightSpan) -> Optional[ExtractedTree]:
    """The tight-span as a graph when it is one-dimensional, else ``None``."""
    C = ts.complex
    if not C.faces:
        return None
    if C.dimension >= 2:
        return None
    used = sorted(set().union(*(f.vertex_ids for f in C.faces)))
    n = len(used)
    edges = []
    parent = {i: i for i in used}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in C.edges:
        ri, rj = find(i), find(j)
        if ri == rj:
            raise InvariantError("one-dimensional tight-span contains a cycle")
        parent[ri] = rj
        vec = C.edge_vector(i, j)
        edges.append((i, j, vec, max_norm(vec)))
    if len(edges) != n - 1:
        raise InvariantError("one-dimensional tight-span is disconnected")
    return ExtractedTree(C.vertices, tuple(edges))


# -- split decomposition --------------------------------------------------------------

@dataclass(frozen=True)
class SplitDecomposition:
    config: PointConfiguration
    splits: tuple
    alpha: tuple
    affine: QVector
    constant: Fraction

    def weight(self) -> WeightFunction:
        """``sum alpha_T w_T + <affine, a> + constant``, evaluated on every point."""
        vals = []
        for p in self.config.points:
            v = self.affine.dot(p) + self.constant
            for s, a in zip(self.splits, self.alpha):
                v += a * max(Fraction(0), s.normal.dot(p) - s.rhs)
            vals.append(v)
        return WeightFunction(self.config, tuple(vals))

    def to_json(self) -> dict:
        A = self.config
        out = []
        for s, a in zip(self.splits, self.alpha):
            d = s.to_json(A)
            d["alpha"] = format_rational(a)
            out.append(d)
        return {"splits": out,
                "alpha": {_split_name(A, s): format_rational(a)
                          for s, a in zip(self.splits, self.alpha)},
                "affine": {"linear": self.affine.to_json(),
                           "constant": format_rational(self.constant)}}


def _split_name(A: PointConfiguration, s: ConfigSplit) -> str:
    if s.tag is not None:
        order = A.X
        return s.tag.describe(order)
    a = sorted(s.plus - s.minus, key=A.index)
    b = sorted(s.minus - s.plus, key=A.index)
    return ",".join(a) + " | " + ",".join(b)


def candidate_splits(A: PointConfiguration) -> list:
    """All splits the refinement route tries for ``A``."""
    if A.kind in ("A", "B_bar"):
        return enumerate_splits(A)
    if A.is_directed:
        seen = {}
        for S, T in directed_partial_splits(A.X):
            s = split_from_directed(A, S, T)
            seen.setdefault(s.key, s)
        return sorted(seen.values(), key=lambda s: _split_sort_key(A, s))
    return brute_force_splits(A)


def _tag_from_direction(A: PointConfiguration, d: QVector) -> Optional[SplitTag]:
    pos = frozenset(l for l, c in d.items() if c > 0)
    neg = frozenset(l for l, c in d.items() if c < 0)
    if any(abs(c) > 1 for c in d.coords) or not pos or not neg:
        return None
    if A.kind == "A":
        first, second = sorted((pos, neg), key=lambda s: sorted(A.X.index(x) for x in s))
        return SplitTag("partial", first, second)
    return None


def splits_from_edges(A: PointConfiguration, ts: TightSpan) -> list:
    """One split per edge direction of a one-dimensional tight-span.

    An edge from ``u`` to ``v`` is dual to a codimension-one cell whose
    points all satisfy ``<a, v - u> = 0``; that hyperplane is the split.
    """
    seen = {}
    C = ts.complex
    for i, j in C.edges:
        d = C.edge_vector(i, j)
        prim = QVector(A.ground, integer_row(list(d.coords)))
        s = _split_from_hyperplane(A, prim, 0)
        if s.plus == frozenset(A.labels) or s.minus == frozenset(A.labels):
            # the edge direction is constant on A only if we factored out a line
            raise InvariantError("edge direction does not separate the configuration")
        tag = _tag_from_direction(A, prim)
        if tag is not None:
            s = ConfigSplit(s.plus, s.minus, s.normal, s.rhs, tag)
        seen.setdefault(s.key, s)
    return sorted(seen.values(), key=lambda s: _split_sort_key(A, s))


def common_refinement(A: PointConfiguration, splits) -> list:
    """Maximal cells of the common refinement of the given splits."""
    full = A.affine_dimension()
    cells = [frozenset(A.labels)]
    for s in splits:
        nxt = set()
        for c in cells:
            for side in (s.plus, s.minus):
                part = c & side
                if part and _affdim(A, part) == full:
                    nxt.add(part)
        cells = [c for c in nxt if not any(c < d for d in nxt)]
    return _cell_sort(A, cells)


def refines(cells, s: ConfigSplit) -> bool:
    return all(c <= s.plus or c <= s.minus for c in cells)


def _solve_decomposition(A: PointConfiguration, w: WeightFunction, splits) -> Optional[SplitDecomposition]:
    n_s = len(splits)
    dim = len(A.ground)
    sw = [split_weight(A, s) for s in splits]
    rows = []
    for idx, p in enumerate(A.points):
        rows.append([sw[k].values[idx] for k in range(n_s)] + list(p.coords) + [Fraction(1)])
    sol = solve_linear(rows, list(w.values))
    if sol is None:
        return None
    x, kernel = sol
    for kvec in kernel:
        if any(kvec[k] != 0 for k in range(n_s)):
            raise InvariantError("split weights are not independent modulo affine functions")
    alpha = tuple(x[:n_s])
    affine = QVector(A.ground, x[n_s:n_s + dim])
    return SplitDecomposition(A, tuple(splits), alpha, affine, x[-1])


def split_decomposition(A: PointConfiguration, w: WeightFunction, method: str = "refinement",
                        candidates=None, cap: int = DEFAULT_CAP,
                        compatibility: str = "auto") -> Optional[SplitDecomposition]:
    """Write ``w`` as a positive combination of split weights plus an affine part.

    Returns ``None`` when the subdivision induced by ``w`` is not the common
    refinement of a compatible family of splits.  ``refinement`` tests all
    candidate splits against the maximal cells; ``edges`` reads candidate
    splits off the edges of the tight-span and so needs it to be a tree.
    ``compatibility`` is ``geometric``, ``combinatorial`` or ``auto`` (the
    containment conditions whenever every split carries a tag).
    """
    cells = maximal_cells(A, w, cap=cap)
    if method == "edges" and candidates is None:
        ts = tight_span(A, w, cap=cap)
        if is_tree(ts) is None:
            return None
        candidates = splits_from_edges(A, ts)
    elif candidates is None:
        if method != "refinement":
            raise UsageError(f"unknown decomposition method {method!r}")
        candidates = candidate_splits(A)
    refined = [s for s in candidates if refines(cells, s)]
    uniq = {}
    for s in refined:
        uniq.setdefault(s.key, s)
    refined = sorted(uniq.values(), key=lambda s: _split_sort_key(A, s))
    mode = compatibility
    if mode == "auto":
        mode = "combinatorial" if all(s.tag is not None for s in refined) else "geometric"
    for s, t in itertools.combinations(refined, 2):
        if not splits_compatible(A, s, t, mode):
            return None
    if set(common_refinement(A, refined)) != set(cells):
        return None
    dec = _solve_decomposition(A, w, refined)
    if dec is None:
        raise InvariantError("refinement holds but the split weights do not span w")
    if any(a <= 0 for a in dec.alpha):
        raise InvariantError("split decomposition produced a non-positive coefficient")
    if dec.weight() != w:
        raise InvariantError("split decomposition does not reproduce the weights")
    return dec


# -- per-map dispatch -----------------------------------------------------------------

def tight_span_of(m, which: Optional[str] = None, cap: int = DEFAULT_CAP) -> TightSpan:
    """Tight-span of a map through its configuration.

    Symmetric maps use A(X).  Square directed maps give ``Θ_D`` over B̄(X)
    (``which="Theta"``) or ``T_D`` over B(X) (default); maps on X × Y work
    the same way over B̄(X, Y) and B(X, Y).  Diversities give ``T(δ)`` over
    the cube (``which="T"``, default) or ``T̄(δ)`` over A(P⁰(Y))
    (``which="T_bar"``); the coordinate f(∅) = 0 is left implicit.
    k-dissimilarities use the hypersimplex.
    """
    if isinstance(m, SymmetricMap):
        A = build_configuration("A", m.ground)
        return tight_span(A, make_weight(m, A), cap=cap, name="T_D")
    if isinstance(m, DirectedMap):
        theta = which in ("Theta", "theta")
        if m.square:
            A = build_configuration("B_bar_directed" if theta else "B_directed", m.X)
        else:
            A = build_configuration("B_bar" if theta else "B", m.X, m.Y)
        return tight_span(A, make_weight(m, A), cap=cap, name="Theta_D" if theta else "T_D")
    if isinstance(m, Diversity):
        if which in (None, "T"):
            dim = len(powerset_ground(m.ground))
            if cap is not None and dim > cap:
                raise EnumerationCapError(
                    f"the cube over |Y| = {len(m.ground)} lives in dimension {dim}, "
                    f"above the cap {cap}; use the LP predicates or T_bar")
            A = build_configuration("C_cube", m.ground)
            return tight_span(A, make_weight(m, A), cap=cap, name="T(delta)",
                              notes=("coordinate f(emptyset) = 0 omitted",))
        if which in ("T_bar", "Tbar"):
            g = powerset_ground(m.ground)
            A = build_configuration("A", g)
            return tight_span(A, make_weight(m, A), cap=cap, name="T_bar(delta)",
                              notes=("coordinate f(emptyset) = 0 omitted",))
        raise UsageError(f"unknown diversity tight-span {which!r}")
    if isinstance(m, KDissimilarity):
        A = build_configuration("hypersimplex", m.ground, k=m.k)
        return tight_span(A, make_weight(m, A), cap=cap, name="T_D (k-dissimilarity)")
    raise UsageError(f"no tight-span for {type(m).__name__}")
