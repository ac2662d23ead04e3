"""Trees, split systems and the maps they induce.

Includes the constructions that turn compatible split systems into trees
(undirected, oriented with subtree families) and back, phylogenetic
diversities, and diversity-tree reconstruction through the engine.
"""
from __future__ import annotations

import itertools
import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .configurations import (build_configuration, nonempty_subsets, parse_subset_label,
                             powerset_ground, split_from_partial_split, subset_label)
from .errors import InvariantError, PreconditionError, UsageError
from .exact import GroundSet, QVector, Q, format_rational, natural_key
from .engine import _solve_decomposition, envelope, split_decomposition
from .maps import (DirectedDistance, Distance, Diversity, Metric, diversity_distance,
                   diversity_to_sym, make_weight)
from .polyhedron import dd_convert, inequality_valid

ZERO = Fraction(0)


def _ground(g) -> GroundSet:
    return g if isinstance(g, GroundSet) else GroundSet(g)


def _fs(xs) -> frozenset:
    return frozenset(map(str, xs))


def _set_key(ground: GroundSet, s) -> list:
    return sorted(ground.index(x) for x in s)


# -- split types ------------------------------------------------------------------

@dataclass(frozen=True)
class PartialSplit:
    """Unordered pair of disjoint nonempty sets; stored with the smaller side first."""

    A: frozenset
    B: frozenset

    def __post_init__(self):
        A, B = _fs(self.A), _fs(self.B)
        if not A or not B:
            raise UsageError("both sides of a partial split must be nonempty")
        if A & B:
            raise UsageError(f"partial split sides overlap in {sorted(A & B)}")
        if sorted(B, key=natural_key) < sorted(A, key=natural_key):
            A, B = B, A
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def is_full(self, X) -> bool:
        return self.A | self.B == frozenset(_ground(X).labels)

    def separates(self, x, y) -> bool:
        return (x in self.A and y in self.B) or (x in self.B and y in self.A)

    def splits(self, S) -> bool:
        S = _fs(S)
        return bool(S & self.A) and bool(S & self.B)

    def describe(self) -> str:
        side = lambda s: ",".join(sorted(s, key=natural_key))
        return f"{side(self.A)}|{side(self.B)}"


@dataclass(frozen=True)
class DirectedPartialSplit:
    A: frozenset
    B: frozenset

    def __post_init__(self):
        A, B = _fs(self.A), _fs(self.B)
        if not A or not B:
            raise UsageError("both sides of a directed partial split must be nonempty")
        if A & B:
            raise UsageError(f"directed partial split sides overlap in {sorted(A & B)}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def is_full(self, X) -> bool:
        return self.A | self.B == frozenset(_ground(X).labels)

    def describe(self) -> str:
        side = lambda s: "{" + ",".join(sorted(s, key=natural_key)) + "}"
        return f"({side(self.A)},{side(self.B)})"


def _split_order(ground: GroundSet, s) -> tuple:
    return (_set_key(ground, s.A), _set_key(ground, s.B))


@dataclass(frozen=True)
class WeightedSplitSystem:
    ground: GroundSet
    splits: tuple
    alpha: tuple

    def __post_init__(self):
        g = _ground(self.ground)
        object.__setattr__(self, "ground", g)
        splits = tuple(self.splits)
        alpha = tuple(Q(a) for a in self.alpha)
        if len(splits) != len(alpha):
            raise UsageError("one weight per split is required")
        if len({type(s) for s in splits}) > 1:
            raise UsageError("a split system mixes directed and undirected splits")
        if len(set(splits)) != len(splits):
            raise UsageError("a split occurs twice in the system")
        labels = frozenset(g.labels)
        for s, a in zip(splits, alpha):
            if not (s.A | s.B) <= labels:
                raise UsageError(f"split {s.describe()} leaves the ground set")
            if a <= 0:
                raise UsageError(f"split {s.describe()} has non-positive weight {a}")
        object.__setattr__(self, "splits", splits)
        object.__setattr__(self, "alpha", alpha)

    @property
    def directed(self) -> bool:
        return bool(self.splits) and isinstance(self.splits[0], DirectedPartialSplit)

    def sorted(self) -> "WeightedSplitSystem":
        order = sorted(range(len(self.splits)), key=lambda i: _split_order(self.ground, self.splits[i]))
        return WeightedSplitSystem(self.ground, tuple(self.splits[i] for i in order),
                                   tuple(self.alpha[i] for i in order))

    def as_dict(self) -> dict:
        return dict(zip(self.splits, self.alpha))

    def __eq__(self, other) -> bool:
        return (isinstance(other, WeightedSplitSystem) and self.ground == other.ground
                and self.as_dict() == other.as_dict())

    def __hash__(self):
        return hash((self.ground, frozenset(self.as_dict().items())))

    def to_json(self) -> dict:
        s = self.sorted()
        return {"ground": list(s.ground.labels),
                "splits": [{"A": sorted(x.A, key=natural_key), "B": sorted(x.B, key=natural_key),
                            "directed": isinstance(x, DirectedPartialSplit),
                            "alpha": format_rational(a)} for x, a in zip(s.splits, s.alpha)]}


# -- trees -------------------------------------------------------------------------

def _adjacency(vertices, edges) -> dict:
    adj = {v: [] for v in vertices}
    for i, (u, v, _) in enumerate(edges):
        adj[u].append((v, i))
        adj[v].append((u, i))
    return adj


def _check_tree(vertices, edges, family) -> None:
    vs = set(vertices)
    if len(vs) != len(vertices):
        raise UsageError("duplicate tree vertices")
    for u, v, l in edges:
        if u not in vs or v not in vs:
            raise UsageError(f"edge {u}-{v} uses an unknown vertex")
        if l < 0:
            raise UsageError(f"edge {u}-{v} has negative length")
    if len(edges) != len(vertices) - 1:
        raise UsageError("a tree on n vertices has n - 1 edges")
    adj = _adjacency(vertices, edges)
    if vertices and len(_component(adj, vertices[0])) != len(vertices):
        raise UsageError("tree is disconnected")
    for x, F in family.items():
        if not F or not F <= vs:
            raise UsageError(f"subtree of {x} is empty or leaves the tree")
        start = next(iter(F))
        if len(_component(adj, start, within=F)) != len(F):
            raise UsageError(f"subtree of {x} is not connected")


def _component(adj, start, within=None, skip_edge=None) -> set:
    seen = {start}
    todo = [start]
    while todo:
        u = todo.pop()
        for v, i in adj[u]:
            if i == skip_edge or v in seen or (within is not None and v not in within):
                continue
            seen.add(v)
            todo.append(v)
    return seen


def _path(adj, a, b) -> list:
    """Edge indices and directions ``(index, from, to)`` along the unique a-b path."""
    prev = {a: None}
    q = deque([a])
    while q:
        u = q.popleft()
        if u == b:
            break
        for v, i in adj[u]:
            if v not in prev:
                prev[v] = (u, i)
                q.append(v)
    out = []
    v = b
    while prev[v] is not None:
        u, i = prev[v]
        out.append((i, u, v))
        v = u
    return out[::-1]


@dataclass(frozen=True)
class WeightedTree:
    """Undirected tree with rational edge lengths and a subtree per ground element."""

    vertices: tuple
    edges: tuple          # (u, v, length)
    family: dict = field(hash=False)  # label -> frozenset of vertices

    def __post_init__(self):
        vs = tuple(str(v) for v in self.vertices)
        es = tuple((str(u), str(v), Q(l)) for u, v, l in self.edges)
        fam = {str(x): frozenset(map(str, F)) for x, F in self.family.items()}
        _check_tree(vs, es, fam)
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", es)
        object.__setattr__(self, "family", fam)

    @classmethod
    def leaf_labelled(cls, vertices, edges, labels: dict) -> "WeightedTree":
        return cls(vertices, edges, {x: {v} for x, v in labels.items()})

    @property
    def ground(self) -> GroundSet:
        return GroundSet(self.family)

    def adjacency(self) -> dict:
        return _adjacency(self.vertices, self.edges)

    def vertex_of(self, x) -> str:
        F = self.family[str(x)]
        if len(F) != 1:
            raise UsageError(f"{x} is mapped to a subtree, not a vertex")
        return next(iter(F))

    def edge_splits(self) -> list:
        """Per edge, the partial split of the ground set it induces (or ``None``)."""
        adj = self.adjacency()
        out = []
        for i, (u, v, l) in enumerate(self.edges):
            side = _component(adj, u, skip_edge=i)
            A = {x for x, F in self.family.items() if F <= side}
            B = {x for x, F in self.family.items() if not F & side}
            out.append(PartialSplit(A, B) if A and B else None)
        return out

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices),
                "edges": [{"source": u, "target": v, "len": format_rational(l)}
                          for u, v, l in self.edges],
                "family": {x: sorted(F, key=natural_key)
                           for x, F in sorted(self.family.items(), key=lambda t: natural_key(t[0]))}}


def _all_pairs(vertices, edges, directed: bool = False) -> dict:
    """Path sums from every vertex; with ``directed`` only forward arcs count."""
    adj = _adjacency(vertices, edges)
    dist = {}
    for a in vertices:
        d = {a: ZERO}
        todo = [a]
        while todo:
            u = todo.pop()
            for v, i in adj[u]:
                if v in d:
                    continue
                s, t, l = edges[i]
                step = l if (not directed or (s == u and t == v)) else ZERO
                d[v] = d[u] + step
                todo.append(v)
        dist[a] = d
    return dist


def distance_from_tree(T: WeightedTree):
    """``D(x, y)`` = least path length between the subtrees of ``x`` and ``y``."""
    dist = _all_pairs(T.vertices, T.edges)
    def D(x, y):
        return min(dist[a][b] for a in T.family[x] for b in T.family[y])
    g = T.ground
    if all(len(F) == 1 for F in T.family.values()):
        return Metric(g, D)
    return Distance(g, D)


@dataclass(frozen=True)
class OrientedTreeRealisation:
    vertices: tuple
    arcs: tuple           # (tail, head, alpha)
    family: dict = field(hash=False)

    def __post_init__(self):
        vs = tuple(str(v) for v in self.vertices)
        arcs = tuple((str(u), str(v), Q(a)) for u, v, a in self.arcs)
        fam = {str(x): frozenset(map(str, F)) for x, F in self.family.items()}
        _check_tree(vs, arcs, fam)
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "family", fam)

    @property
    def ground(self) -> GroundSet:
        return GroundSet(self.family)

    @property
    def phi(self) -> Optional[dict]:
        if all(len(F) == 1 for F in self.family.values()):
            return {x: next(iter(F)) for x, F in self.family.items()}
        return None

    def subtree_is_directed_path(self, x) -> bool:
        F = self.family[str(x)]
        return _is_directed_path(F, [a for a in self.arcs if a[0] in F and a[1] in F])

    def is_directed_path(self) -> bool:
        return _is_directed_path(set(self.vertices), list(self.arcs))

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices),
                "arcs": [{"source": u, "target": v, "len": format_rational(a)}
                         for u, v, a in self.arcs],
                "family": {x: sorted(F, key=natural_key)
                           for x, F in sorted(self.family.items(), key=lambda t: natural_key(t[0]))}}


def _is_directed_path(vertices, arcs) -> bool:
    if len(arcs) != len(vertices) - 1:
        return False
    outd = {v: 0 for v in vertices}
    ind = {v: 0 for v in vertices}
    for u, v, _ in arcs:
        outd[u] += 1
        ind[v] += 1
    return all(outd[v] <= 1 and ind[v] <= 1 for v in vertices)


def oriented_distance(R: OrientedTreeRealisation) -> DirectedDistance:
    """Sum of arc weights traversed forwards, minimised over the two subtrees."""
    dist = _all_pairs(R.vertices, R.arcs, directed=True)
    def D(x, y):
        return min(dist[a][b] for a in R.family[x] for b in R.family[y])
    return DirectedDistance(R.ground, D)


# -- induced maps -------------------------------------------------------------------

def map_from_splits(kind: str, S: WeightedSplitSystem):
    """``d_(P, α)``, ``D_(S, α)`` or ``δ_(S, α)`` for ``kind`` distance, directed, diversity."""
    pairs = list(zip(S.splits, S.alpha))
    if kind == "distance":
        if S.directed:
            raise UsageError("distance maps come from undirected partial splits")
        return Distance(S.ground, lambda x, y: sum((a for s, a in pairs if s.separates(x, y)), ZERO))
    if kind == "directed":
        if pairs and not S.directed:
            raise UsageError("directed maps come from directed partial splits")
        return DirectedDistance(S.ground, lambda x, y: sum(
            (a for s, a in pairs if x in s.A and y in s.B), ZERO))
    if kind == "diversity":
        if S.directed:
            raise UsageError("diversities come from undirected splits")
        return Diversity(S.ground, lambda X: sum((a for s, a in pairs if s.splits(X)), ZERO))
    raise UsageError(f"unknown map kind {kind!r}")


# -- compatibility -------------------------------------------------------------------

def _chain(a, b, c, d) -> bool:
    return (a <= c and b >= d) or (a >= c and b <= d)


def splits_compatible_sets(kind: str, S1, S2, X=None) -> bool:
    """Containment test for two (directed) partial splits.

    ``kind`` is ``partial`` or ``directed``.  Directed splits also accept the
    complement pair ``(X - A, X - B)`` of the first split, so ``X`` is needed.
    """
    if kind == "partial":
        return _chain(S1.A, S1.B, S2.A, S2.B) or _chain(S1.A, S1.B, S2.B, S2.A)
    if kind == "directed":
        if X is None:
            raise UsageError("directed compatibility needs the ground set")
        Xs = frozenset(_ground(X).labels)
        return _chain(S1.A, S1.B, S2.A, S2.B) or _chain(Xs - S1.A, Xs - S1.B, S2.A, S2.B)
    raise UsageError(f"unknown split kind {kind!r}")


def incompatible_pair(S: WeightedSplitSystem) -> Optional[tuple]:
    kind = "directed" if S.directed else "partial"
    for s, t in itertools.combinations(S.splits, 2):
        if not splits_compatible_sets(kind, s, t, S.ground):
            return s, t
    return None


def strongly_compatible(splits: Iterable) -> bool:
    """Whether the directed splits admit an order with A increasing and B decreasing."""
    ss = sorted(splits, key=lambda s: (len(s.A), -len(s.B)))
    return all(s.A <= t.A and s.B >= t.B for s, t in zip(ss, ss[1:]))


# -- oriented realisations ------------------------------------------------------------

def _encode_directed(X: GroundSet, s: DirectedPartialSplit) -> tuple:
    """Directed partial split as an ordered bipartition (tail, head) of X_s ∪ X_t."""
    tail = {f"{x}_s" for x in X.labels if x not in s.B} | {f"{x}_t" for x in s.A}
    head = {f"{x}_s" for x in s.B} | {f"{x}_t" for x in X.labels if x not in s.A}
    return frozenset(tail), frozenset(head)


def _laminar_tree(elements: list, clusters: list):
    """Rooted tree of a laminar family (duplicates become chains).

    ``clusters`` is a list of sets not containing ``elements[0]``.  Returns the
    processing order, the parent node of every cluster (0 is the root, the
    cluster in position ``k`` of the order is node ``k + 1``) and the node
    of each element.
    """
    order = sorted(range(len(clusters)), key=lambda i: (-len(clusters[i]), i))
    node = {i: k + 1 for k, i in enumerate(order)}
    parent = {}
    for k, i in enumerate(order):
        par = 0
        for j in order[:k]:
            if clusters[i] <= clusters[j]:
                par = node[j]
        parent[i] = par
    where = {}
    for z in elements:
        n = 0
        for i in order:
            if z in clusters[i]:
                n = node[i]
        where[z] = n
    return order, parent, node, where


def realisation_from_splits(S: WeightedSplitSystem) -> OrientedTreeRealisation:
    """Oriented tree whose forward-edge distances reproduce ``Σ α(S) D_S``.

    Each directed partial split ``(A, B)`` is read as a bipartition of the
    doubled ground set in which ``x_s, x_t`` sit on the tail side for
    ``x ∈ A``, on the head side for ``x ∈ B``, and straddle the edge
    otherwise.  Compatibility makes these bipartitions laminar, and ``F_x``
    is the path from the vertex of ``x_s`` to that of ``x_t``.
    """
    if S.splits and not S.directed:
        raise UsageError("realisations are built from directed partial splits")
    bad = incompatible_pair(S)
    if bad is not None:
        raise PreconditionError(f"splits {bad[0].describe()} and {bad[1].describe()} "
                                "are not compatible")
    X = S.ground
    S = S.sorted()
    elements = [f"{x}_{e}" for x in X.labels for e in "st"]
    root = elements[0]
    clusters, forward = [], []
    for s in S.splits:
        tail, head = _encode_directed(X, s)
        if root in tail:
            clusters.append(head)
            forward.append(True)   # parent -> child
        else:
            clusters.append(tail)
            forward.append(False)
    for (i, c), (j, d) in itertools.combinations(enumerate(clusters), 2):
        if not (c <= d or d <= c or not c & d):
            raise InvariantError("compatible directed splits gave a non-laminar family")
    order, parent, node, where = _laminar_tree(elements, clusters)
    vertices = tuple(f"v{k}" for k in range(len(clusters) + 1))
    arcs = []
    for i in order:
        p, c = f"v{parent[i]}", f"v{node[i]}"
        arcs.append((p, c, S.alpha[i]) if forward[i] else (c, p, S.alpha[i]))
    adj = _adjacency(vertices, arcs)
    family = {}
    for x in X.labels:
        a, b = f"v{where[x + '_s']}", f"v{where[x + '_t']}"
        family[x] = frozenset([a] + [t for _, _, t in _path(adj, a, b)])
    R = OrientedTreeRealisation(vertices, tuple(arcs), family)
    for x in X.labels:
        if not R.subtree_is_directed_path(x):
            raise InvariantError(f"subtree of {x} is not a directed path")
    if oriented_distance(R) != map_from_splits("directed", S):
        raise InvariantError("realisation does not reproduce the split system")
    return R


def splits_from_realisation(R: OrientedTreeRealisation) -> WeightedSplitSystem:
    """One directed partial split per arc, from the components of the tree minus the arc.

    Arcs that separate no pair of subtrees, or carry weight 0, contribute
    nothing and are skipped; arcs inducing the same split add up.
    """
    adj = _adjacency(R.vertices, R.arcs)
    acc: dict = {}
    for i, (u, v, a) in enumerate(R.arcs):
        side = _component(adj, u, skip_edge=i)
        A = {x for x, F in R.family.items() if F <= side}
        B = {x for x, F in R.family.items() if not F & side}
        if not A or not B or a == 0:
            continue
        s = DirectedPartialSplit(A, B)
        acc[s] = acc.get(s, ZERO) + a
    S = WeightedSplitSystem(R.ground, tuple(acc), tuple(acc.values())).sorted()
    if map_from_splits("directed", S) != oriented_distance(R):
        raise InvariantError("per-arc splits do not sum to the realised distance")
    return S


# -- undirected trees from full splits ------------------------------------------------------

def tree_from_splits(S: WeightedSplitSystem) -> WeightedTree:
    """Leaf-labelled tree of a compatible system of full splits."""
    if S.directed:
        raise UsageError("expected undirected splits")
    X = S.ground
    for s in S.splits:
        if not s.is_full(X):
            raise UsageError(f"{s.describe()} is not a full split")
    bad = incompatible_pair(S)
    if bad is not None:
        raise PreconditionError(f"splits {bad[0].describe()} and {bad[1].describe()} "
                                "are not compatible")
    S = S.sorted()
    elements = list(X.labels)
    root = elements[0]
    clusters = [s.B if root in s.A else s.A for s in S.splits]
    order, parent, node, where = _laminar_tree(elements, clusters)
    vertices = tuple(f"v{k}" for k in range(len(clusters) + 1))
    edges = tuple((f"v{parent[i]}", f"v{node[i]}", S.alpha[i]) for i in order)
    return WeightedTree(vertices, edges, {x: {f"v{where[x]}"} for x in elements})


def to_newick(T: WeightedTree) -> str:
    """Newick text with rational branch lengths written as ``p/q``.

    Internal vertices carrying a label become labelled internal nodes.
    The tree is rooted at the vertex of the first ground element.
    """
    adj = T.adjacency()
    name = {}
    for x, F in T.family.items():
        if len(F) != 1:
            raise UsageError("Newick output needs a vertex per ground element")
        name.setdefault(next(iter(F)), []).append(x)
    root = T.vertex_of(T.ground.labels[0])

    def label(v):
        return "/".join(sorted(name.get(v, []), key=natural_key))

    def rec(v, parent_edge):
        kids = []
        for w, i in adj[v]:
            if i == parent_edge:
                continue
            kids.append((rec(w, i), i))
        kids.sort(key=lambda t: t[0])
        inner = ",".join(f"{txt}:{format_rational(T.edges[i][2])}" for txt, i in kids)
        return (f"({inner})" if kids else "") + label(v)

    return rec(root, None) + ";"


def canonical_splits(T: WeightedTree) -> dict:
    """Map from induced partial split to total length; zero-length edges dropped."""
    out: dict = {}
    for s, (_, _, l) in zip(T.edge_splits(), T.edges):
        if s is None or l == 0:
            continue
        out[s] = out.get(s, ZERO) + l
    return out


def trees_isomorphic(T1: WeightedTree, T2: WeightedTree) -> bool:
    """Same ground set and the same weighted induced splits."""
    return T1.ground == T2.ground and canonical_splits(T1) == canonical_splits(T2)


# -- phylogenetic diversity -----------------------------------------------------------------

def phylogenetic_diversity(T: WeightedTree) -> Diversity:
    """``δ_T(A)``: length of the smallest subtree connecting the leaves of ``A``."""
    adj = T.adjacency()
    for x in T.family:
        v = T.vertex_of(x)
        if len(adj[v]) > 1:
            raise PreconditionError(f"{x} does not sit on a leaf")

    def delta(A):
        vs = sorted({T.vertex_of(x) for x in A})
        if len(vs) < 2:
            return ZERO
        used = set()
        for b in vs[1:]:
            used |= {i for i, _, _ in _path(adj, vs[0], b)}
        return sum((T.edges[i][2] for i in used), ZERO)

    return Diversity(T.ground, delta)


# -- diversity reconstruction ---------------------------------------------------------------

ENGINE_LIMIT = 5


def _powerset_pair(Y: GroundSet, tag) -> Optional[PartialSplit]:
    """``p(P)``: the partial split {A, B} of Y with P = {P⁰(A), P⁰(B)}, if any."""
    sides = []
    for side in (tag.A, tag.B):
        sets = [parse_subset_label(l) for l in side]
        U = frozenset().union(*sets)
        if set(sets) != set(nonempty_subsets(GroundSet(sorted(U, key=Y.index)))):
            return None
        sides.append(U)
    return PartialSplit(*sides)


@dataclass(frozen=True)
class DiversityTree:
    tree: WeightedTree
    splits: WeightedSplitSystem
    route: str

    def to_json(self) -> dict:
        return {"tree": self.tree.to_json(), "newick": to_newick(self.tree),
                "splits": self.splits.to_json(), "route": self.route}


def reconstruct_diversity_tree(delta: Diversity, route: str = "auto",
                               cap: Optional[int] = None) -> Optional[DiversityTree]:
    """The weighted tree of a phylogenetic diversity, or ``None``.

    ``engine`` decomposes ``d_δ`` on A(P⁰(Y)) by reading splits off the
    edges of its tight-span, then maps each recovered split of P⁰(Y) back
    to a split of Y.  ``candidates`` skips vertex enumeration: it solves
    for weights on the splits of A(P⁰(Y)) coming from full splits of Y and
    accepts a compatible nonnegative solution.  ``auto`` uses the engine up
    to |Y| = 5.
    """
    Y = delta.ground
    if all(delta(S) == 0 for S in delta.subsets()):
        vertex = "v0"
        T = WeightedTree((vertex,), (), {y: {vertex} for y in Y.labels})
        return DiversityTree(T, WeightedSplitSystem(Y, (), ()), "trivial")
    if route == "auto":
        route = "engine" if len(Y) <= ENGINE_LIMIT else "candidates"
    d = diversity_distance(delta)
    A = build_configuration("A", d.ground)
    w = make_weight(d, A)
    found: dict = {}
    if route == "engine":
        # d_delta on P0(Y) is cheap to enumerate even past the default cap
        dec = split_decomposition(A, w, method="edges", cap=cap or len(A.ground))
        if dec is None:
            return None
        for s, a in zip(dec.splits, dec.alpha):
            if s.tag is None:
                raise InvariantError("tight-span edge of d_delta is not a partial split direction")
            p = _powerset_pair(Y, s.tag)
            if p is None:
                raise InvariantError("recovered split of P0(Y) is not a pair of power sets")
            if not p.is_full(Y):
                return None
            found[p] = found.get(p, ZERO) + a
    elif route == "candidates":
        cands, parts = [], []
        for k in range(1, len(Y)):
            for C in itertools.combinations(Y.labels, k):
                p = PartialSplit(C, set(Y.labels) - set(C))
                if p in parts:
                    continue
                parts.append(p)
                cands.append(split_from_partial_split(
                    A, {subset_label(x, Y) for x in nonempty_subsets(GroundSet(sorted(p.A, key=Y.index)))},
                    {subset_label(x, Y) for x in nonempty_subsets(GroundSet(sorted(p.B, key=Y.index)))}))
        dec = _solve_decomposition(A, w, cands)
        if dec is None or any(a < 0 for a in dec.alpha):
            return None
        for p, a in zip(parts, dec.alpha):
            if a > 0:
                found[p] = a
    else:
        raise UsageError(f"unknown reconstruction route {route!r}")
    S = WeightedSplitSystem(Y, tuple(found), tuple(found.values())).sorted()
    if incompatible_pair(S) is not None:
        return None
    T = tree_from_splits(S)
    if phylogenetic_diversity(T) != delta:
        if route == "engine":
            raise InvariantError("reconstructed tree does not reproduce the diversity")
        return None
    return DiversityTree(T, S, route)


# -- tight-span equality -----------------------------------------------------------------

@dataclass
class EqualityReport:
    ok: bool
    method: str
    checked: int
    violations: list
    lp_checked: int = 0

    def to_json(self) -> dict:
        return {"ok": self.ok, "method": self.method, "checked": self.checked,
                "lp_checked": self.lp_checked, "violations": self.violations}


def _scaled(vectors) -> tuple:
    """Integer matrix of rational vectors, all scaled by one common denominator."""
    den = 1
    for v in vectors:
        for c in v.coords:
            den = den * c.denominator // math.gcd(den, c.denominator)
    return [[c.numerator * (den // c.denominator) for c in v.coords] for v in vectors], den


def verify_tightspan_equal(S: WeightedSplitSystem, method: str = "auto",
                           lp_sample: int = 32, seed: int = 0) -> EqualityReport:
    """Check that the cube polyhedron and the pair polyhedron of ``δ_(S, α)`` coincide.

    Both live on coordinates f(A), A ∈ P⁰(Y).  P̄ keeps f(A) + f(B) ≥ δ(A ∪ B)
    and the cube polyhedron P keeps Σ f(A_i) ≥ δ(∪ A_i) over all nonempty
    families, so P ⊆ P̄.  ``vertices`` compares the two V-representations.
    ``lp`` checks every cube inequality for validity on P̄: the minimum of a
    linear form over P̄ is attained at its vertices (or is unbounded along a
    ray), evaluated exactly in bulk; a seeded sample of inequalities is
    re-checked with the simplex solver.
    """
    if S.directed:
        raise UsageError("expected full splits of Y")
    Y = S.ground
    for s in S.splits:
        if not s.is_full(Y):
            raise PreconditionError(f"{s.describe()} is not a full split of Y")
    delta = map_from_splits("diversity", S)
    if method == "auto":
        method = "vertices" if len(Y) <= 3 else "lp"
    g = powerset_ground(Y)
    Abar = build_configuration("A", g)
    Pbar = envelope(Abar, make_weight(diversity_to_sym(delta), Abar))
    Vbar = dd_convert(Pbar, cap=None)
    if method == "vertices":
        C = build_configuration("C_cube", Y)
        V = dd_convert(envelope(C, make_weight(delta, C)), cap=None)
        same = (V.vertices == Vbar.vertices and V.rays == Vbar.rays
                and V.lineality == Vbar.lineality)
        return EqualityReport(same, method, len(V.vertices) + len(V.rays),
                              [] if same else ["vertex or ray sets differ"])
    if method != "lp":
        raise UsageError(f"unknown method {method!r}")
    subsets = nonempty_subsets(Y)
    m = len(subsets)
    fams = np.array([[(f >> i) & 1 for i in range(m)] for f in range(1, 1 << m)], dtype=np.int64)
    unions = [frozenset().union(*(subsets[i] for i in range(m) if (f >> i) & 1))
              for f in range(1, 1 << m)]
    rhs = np.array([int(delta(U)) if delta(U).denominator == 1 else None for U in unions],
                   dtype=object)
    verts, den = _scaled(Vbar.vertices)
    rays, _ = _scaled(Vbar.rays) if Vbar.rays else ([], 1)
    bound = max((abs(x) for row in verts + rays for x in row), default=0)
    if bound * m >= 2 ** 62 or any(r is None for r in rhs):
        raise UsageError("values too large or non-integral for the bulk check")
    rhs = rhs.astype(np.int64) * den
    vals = fams @ np.array(verts, dtype=np.int64).T
    ok_v = vals.min(axis=1) >= rhs
    ok_r = ((fams @ np.array(rays, dtype=np.int64).T) >= 0).all(axis=1) if rays else \
        np.ones(len(fams), dtype=bool)
    bad = np.nonzero(~(ok_v & ok_r))[0]
    violations = [[subset_label(subsets[i], Y) for i in range(m) if fams[k, i]] for k in bad]
    rng = random.Random(seed)
    sample = rng.sample(range(len(fams)), min(lp_sample, len(fams)))
    for k in sample:
        a = QVector(g, [int(x) for x in fams[k]])
        if inequality_valid(Pbar, a, delta(unions[k])) != bool(ok_v[k] and ok_r[k]):
            raise InvariantError("exact LP and vertex evaluation disagree on a cube inequality")
    return EqualityReport(not violations, method, len(fams), violations, len(sample))
