"""Polyhedra given by inequalities: exact vertex/ray enumeration and faces.

The workhorse is :func:`dd_convert`, a double-description implementation on
primitive integer vectors.  Python integers never overflow, so the whole
computation is exact; rationals only appear when vertices are dehomogenized.

A polyhedron whose recession cone contains a line is handled by splitting off
its lineality space ``L``: vertices and rays are reported for ``P ∩ L^⊥`` and
``L`` is returned separately.  Faces of ``P`` and of ``P ∩ L^⊥`` correspond
one to one, so everything downstream works on the pointed part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import EnumerationCapError, PreconditionError, UsageError
from .exact import (GroundSet, QVector, Q, format_rational, integer_row, lp_standard,
                    lp_solve, nullspace, parse_rational, primitive, rank, rref)

DEFAULT_CAP = 16


@dataclass(frozen=True)
class HPolyhedron:
    """``{x : <a, x> >= b for (a, b) in inequalities, <a, x> = b for equalities}``."""

    ground: GroundSet
    inequalities: tuple = ()
    equalities: tuple = ()

    def __post_init__(self):
        for name in ("inequalities", "equalities"):
            rows = tuple((a if isinstance(a, QVector) else QVector(self.ground, a), Q(b))
                         for a, b in getattr(self, name))
            for a, _ in rows:
                if a.ground != self.ground:
                    raise UsageError("constraint normal over a different ground set")
            object.__setattr__(self, name, rows)

    @property
    def dim(self) -> int:
        return len(self.ground)

    def contains(self, x: QVector) -> bool:
        return (all(a.dot(x) >= b for a, b in self.inequalities)
                and all(a.dot(x) == b for a, b in self.equalities))

    def to_json(self) -> dict:
        def rows(rs):
            return [{"normal": a.to_json(), "rhs": format_rational(b)} for a, b in rs]
        return {"ground": list(self.ground.labels),
                "inequalities": rows(self.inequalities),
                "equalities": rows(self.equalities)}

    @classmethod
    def from_json(cls, data: dict) -> "HPolyhedron":
        ground = GroundSet(data["ground"])

        def rows(rs):
            return tuple((QVector.from_json(ground, r["normal"]), parse_rational(str(r["rhs"])))
                         for r in rs)
        return cls(ground, rows(data.get("inequalities", ())), rows(data.get("equalities", ())))


@dataclass(frozen=True)
class VRepresentation:
    """Vertices and rays of the pointed part plus a lineality basis."""

    ground: GroundSet
    vertices: tuple = ()
    rays: tuple = ()
    lineality: tuple = ()

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def to_json(self) -> dict:
        return {"ground": list(self.ground.labels),
                "vertices": [v.to_json() for v in self.vertices],
                "rays": [r.to_json() for r in self.rays],
                "lineality": [l.to_json() for l in self.lineality]}


# -- double description --------------------------------------------------------

def _normalize(v: list) -> tuple:
    g = 0
    for x in v:
        if x:
            g = math.gcd(g, x)
            if g == 1:
                return tuple(v)
    if g == 0:
        return tuple(v)
    return tuple(x // g for x in v)


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b) if x)


def _int_nullspace(rows: Sequence[Sequence[int]], ncols: int) -> list:
    basis = nullspace([list(map(Fraction, r)) for r in rows], ncols) if rows else \
        [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    return [_normalize(integer_row(v)) for v in basis]


def _popcount(x: int) -> int:
    return x.bit_count()


def dd_cone(eq_rows: Sequence[Sequence[int]], ineq_rows: Sequence[Sequence[int]],
            ncols: int):
    """Extreme rays and lineality of ``{z : E z = 0, H z >= 0}`` (integer data).

    Returns ``(rays, lineality)`` where each ray is a primitive integer tuple.
    Constraints are inserted in the given order.
    """
    lin = _int_nullspace(eq_rows, ncols)
    rays: list = []
    zeros: list = []  # bitmask of processed inequality indices tight at each ray
    ids: list = []    # stable ray ids, so that per-constraint masks survive deletions
    tight: dict = {}  # constraint index -> bitmask over ray ids tight at it
    next_id = 0
    cone_dim = len(lin)

    def _register(z: int, rid: int) -> None:
        b = 1 << rid
        while z:
            low = z & -z
            j = low.bit_length() - 1
            tight[j] = tight.get(j, 0) | b
            z ^= low

    for k, h in enumerate(ineq_rows):
        bit = 1 << k
        lvals = [_dot(h, l) for l in lin]
        pivot = next((i for i, v in enumerate(lvals) if v), None)
        if pivot is not None:
            l0 = lin[pivot]
            s0 = lvals[pivot]
            if s0 < 0:
                l0 = tuple(-x for x in l0)
                s0 = -s0
            new_lin = []
            for i, l in enumerate(lin):
                if i == pivot:
                    continue
                v = _dot(h, l)
                if v:
                    l = _normalize([s0 * x - v * y for x, y in zip(l, l0)])
                new_lin.append(l)
            mask = 0
            for i, r in enumerate(rays):
                v = _dot(h, r)
                if v:
                    rays[i] = _normalize([s0 * x - v * y for x, y in zip(r, l0)])
                zeros[i] |= bit
                mask |= 1 << ids[i]
            rays.append(l0)
            zeros.append(bit - 1)
            ids.append(next_id)
            _register(bit - 1, next_id)
            tight[k] = mask
            next_id += 1
            lin = new_lin
            continue

        vals = [_dot(h, r) for r in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        zer = [i for i, v in enumerate(vals) if v == 0]
        zmask = 0
        for i in zer:
            zmask |= 1 << ids[i]
        if not neg:
            for i in zer:
                zeros[i] |= bit
            tight[k] = zmask
            continue
        if not pos:
            rays = [rays[i] for i in zer]
            zeros = [zeros[i] | bit for i in zer]
            ids = [ids[i] for i in zer]
            tight[k] = zmask
            cone_dim = rank([list(r) for r in rays] + [list(l) for l in lin])
            continue
        need = cone_dim - len(lin) - 2
        alive = 0
        for rid in ids:
            alive |= 1 << rid
        new_rays, new_zeros = [], []
        for p in pos:
            zp = zeros[p]
            vp = vals[p]
            rp = rays[p]
            bp = 1 << ids[p]
            for n in neg:
                common = zp & zeros[n]
                if need > 0 and _popcount(common) < need:
                    continue
                pair = bp | (1 << ids[n])
                acc = alive
                c = common
                while c and acc != pair:
                    low = c & -c
                    acc &= tight[low.bit_length() - 1]
                    c ^= low
                if acc != pair:
                    continue
                vn = -vals[n]
                rn = rays[n]
                new_rays.append(_normalize([vp * x + vn * y for x, y in zip(rn, rp)]))
                new_zeros.append(common | bit)
        keep = [i for i in range(len(rays)) if vals[i] >= 0]
        rays = [rays[i] for i in keep] + new_rays
        zeros = [zeros[i] | (bit if vals[i] == 0 else 0) for i in keep] + new_zeros
        ids = [ids[i] for i in keep]
        tight[k] = zmask
        for z in new_zeros:
            _register(z, next_id)
            ids.append(next_id)
            next_id += 1
    return rays, lin


def _homogenize(a: QVector, b) -> list:
    return integer_row([-Q(b)] + list(a.coords))


def lineality_space(P: HPolyhedron) -> list:
    """Integer basis (in reduced echelon form) of the lineality space of ``P``."""
    rows = [list(a.coords) for a, _ in P.inequalities] + [list(a.coords) for a, _ in P.equalities]
    if not rows:
        basis = nullspace([], P.dim)
    else:
        basis = nullspace(rows, P.dim)
    if not basis:
        return []
    M, _ = rref(basis, P.dim)
    return [primitive(r, sign_normalize=True) for r in M if any(r)]


def dd_convert(P: HPolyhedron, cap: int = DEFAULT_CAP) -> VRepresentation:
    """Vertices and rays of ``P``, sorted lexicographically.

    Raises :class:`EnumerationCapError` when the ambient dimension exceeds
    ``cap``.  An empty polyhedron yields an empty representation.
    """
    n = P.dim
    if cap is not None and n > cap:
        raise EnumerationCapError(
            f"vertex enumeration in dimension {n} exceeds the cap {cap}; "
            "raise the cap or use the LP-based predicates")
    lin = lineality_space(P)
    eqs = [_homogenize(a, b) for a, b in P.equalities]
    eqs += [[0] + list(l) for l in lin]
    # sparse rows first: the insertion order only changes the running time,
    # and for envelopes it keeps the intermediate cones small
    rows = sorted((_homogenize(a, b) for a, b in P.inequalities),
                  key=lambda r: (sum(1 for x in r[1:] if x), r))
    ineqs = [[1] + [0] * n] + rows
    raw, leftover = dd_cone(eqs, ineqs, n + 1)
    if leftover:
        raise AssertionError("lineality survived its own orthogonal complement")
    return _from_raw(P.ground, raw, lin)


def _from_raw(ground, raw, lin) -> VRepresentation:
    verts, rays = set(), set()
    for r in raw:
        t = r[0]
        if t > 0:
            verts.add(tuple(Fraction(x, t) for x in r[1:]))
        elif t == 0:
            rays.add(_normalize(list(r[1:])))
        else:
            raise AssertionError("homogenizing coordinate went negative")
    if not verts:
        return VRepresentation(ground, (), (), tuple(QVector(ground, l) for l in lin))
    return VRepresentation(
        ground,
        tuple(QVector(ground, v) for v in sorted(verts)),
        tuple(QVector(ground, r) for r in sorted(rays)),
        tuple(QVector(ground, l) for l in lin))


# -- incidences and faces ------------------------------------------------------

def _incidence(P: HPolyhedron, V: VRepresentation):
    """Bitmasks (over ``P.inequalities``) of tight constraints per generator."""
    # integer arithmetic on sparse homogenized rows: (-b, a) . (den, num) == 0
    rows = []
    for a, b in P.inequalities:
        r = _homogenize(a, b)
        rows.append((r[0], [(i, c) for i, c in enumerate(r[1:]) if c]))

    def masks(points, homogen: bool):
        out = []
        for p in points:
            den = 1
            for c in p.coords:
                den = den * c.denominator // math.gcd(den, c.denominator)
            num = [int(c * den) for c in p.coords]
            t = den if homogen else 0
            m = 0
            for k, (r0, sparse) in enumerate(rows):
                if r0 * t + sum(c * num[i] for i, c in sparse) == 0:
                    m |= 1 << k
            out.append(m)
        return out

    return masks(V.vertices, True), masks(V.rays, False)


def _bits(mask: int) -> frozenset:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def _face_dim(V: VRepresentation, vids, rids, with_lineality: bool = True) -> int:
    if not vids:
        return -1
    vids = sorted(vids)
    v0 = V.vertices[vids[0]].coords
    dirs = [[x - y for x, y in zip(V.vertices[i].coords, v0)] for i in vids[1:]]
    dirs += [list(V.rays[j].coords) for j in rids]
    if with_lineality:
        dirs += [list(l.coords) for l in V.lineality]
    return rank(dirs) if dirs else 0


@dataclass(frozen=True)
class Face:
    active: frozenset
    dim: int
    vertex_ids: frozenset
    ray_ids: frozenset


@dataclass(frozen=True)
class FaceLattice:
    faces: tuple

    def order(self):
        """Pairs ``(i, j)`` with face ``i`` a proper subface of face ``j``."""
        out = []
        for i, f in enumerate(self.faces):
            for j, g in enumerate(self.faces):
                if i != j and f.vertex_ids <= g.vertex_ids and f.ray_ids <= g.ray_ids:
                    out.append((i, j))
        return out

    def histogram(self) -> dict:
        h = {}
        for f in self.faces:
            h[f.dim] = h.get(f.dim, 0) + 1
        return dict(sorted(h.items()))


def _closure_faces(vmask, rmask, allow_rays: bool, nineq: int):
    """All faces reachable from vertices by closure, as (vset, rset, active) bitmasks."""
    gens = [(m, ("v", i)) for i, m in enumerate(vmask)]
    if allow_rays:
        gens += [(m, ("r", j)) for j, m in enumerate(rmask)]

    def closure(active):
        vs = 0
        for i, m in enumerate(vmask):
            if m & active == active:
                vs |= 1 << i
        rs = 0
        for j, m in enumerate(rmask):
            if m & active == active:
                rs |= 1 << j
        return vs, rs

    seen = {}
    frontier = []
    for i, m in enumerate(vmask):
        key = m
        if key not in seen:
            vs, rs = closure(m)
            seen[key] = (vs, rs)
            frontier.append(key)
    while frontier:
        nxt = []
        for active in frontier:
            vs, rs = seen[active]
            for m, (kind, idx) in gens:
                if kind == "v" and vs >> idx & 1:
                    continue
                if kind == "r" and rs >> idx & 1:
                    continue
                act = active & m
                if act in seen:
                    continue
                cvs, crs = closure(act)
                if crs and not allow_rays:
                    continue
                seen[act] = (cvs, crs)
                nxt.append(act)
        frontier = nxt
    return seen


def face_lattice(P: HPolyhedron, V: Optional[VRepresentation] = None) -> FaceLattice:
    """All nonempty faces of ``P``, each identified by its active inequality set."""
    if V is None:
        V = dd_convert(P)
    if V.is_empty:
        return FaceLattice(())
    vmask, rmask = _incidence(P, V)
    seen = _closure_faces(vmask, rmask, True, len(P.inequalities))
    faces = []
    for active, (vs, rs) in seen.items():
        vids, rids = _bits(vs), _bits(rs)
        faces.append(Face(_bits(active), _face_dim(V, vids, rids), vids, rids))
    faces.sort(key=lambda f: (-f.dim, sorted(f.vertex_ids), sorted(f.ray_ids)))
    return FaceLattice(tuple(faces))


@dataclass(frozen=True)
class BoundedComplex:
    """The bounded faces of a polyhedron, with its vertex and edge data."""

    ground: GroundSet
    vertices: tuple
    faces: tuple
    edges: tuple = field(default=())

    @property
    def dimension(self) -> int:
        return max((f.dim for f in self.faces), default=-1)

    def faces_by_dim(self) -> dict:
        out = {}
        for f in self.faces:
            out.setdefault(f.dim, []).append(f)
        return dict(sorted(out.items()))

    def maximal_faces(self) -> list:
        return [f for f in self.faces
                if not any(f is not g and f.vertex_ids < g.vertex_ids for g in self.faces)]

    def edge_vector(self, i: int, j: int) -> QVector:
        return self.vertices[j] - self.vertices[i]

    def to_json(self) -> dict:
        fb = {}
        for d, fs in self.faces_by_dim().items():
            fb[str(d)] = [sorted(f.vertex_ids) for f in fs]
        return {"ground": list(self.ground.labels),
                "vertices": [v.to_json() for v in self.vertices],
                "faces_by_dim": fb,
                "edges": [list(e) for e in self.edges]}


def bounded_complex(P: HPolyhedron, V: Optional[VRepresentation] = None,
                    cap: int = DEFAULT_CAP, modulo_lineality: bool = False) -> BoundedComplex:
    """Faces of ``P`` without rays.

    A polyhedron containing a line has no bounded faces at all.  With
    ``modulo_lineality`` the lines are factored out instead and the complex
    of ``P ∩ L^⊥`` is returned; this is how envelopes over configurations
    whose affine hull has codimension above one are treated.
    """
    if V is None:
        V = dd_convert(P, cap=cap)
    if V.is_empty or (V.lineality and not modulo_lineality):
        return BoundedComplex(P.ground, (), (), ())
    vmask, rmask = _incidence(P, V)
    seen = _closure_faces(vmask, rmask, False, len(P.inequalities))
    faces = []
    for active, (vs, rs) in seen.items():
        if rs:
            continue
        vids = _bits(vs)
        faces.append(Face(_bits(active), _face_dim(V, vids, (), False), vids, frozenset()))
    # vertex ids index into V.vertices, which every bounded face draws from
    faces.sort(key=lambda f: (f.dim, sorted(f.vertex_ids)))
    edges = tuple(sorted(tuple(sorted(f.vertex_ids)) for f in faces if f.dim == 1))
    return BoundedComplex(P.ground, V.vertices, tuple(faces), edges)


def bounded_faces(P: HPolyhedron, cap: int = DEFAULT_CAP,
                  modulo_lineality: bool = False) -> BoundedComplex:
    return bounded_complex(P, cap=cap, modulo_lineality=modulo_lineality)


# -- predicates ----------------------------------------------------------------

def is_minimal_element(P: HPolyhedron, x: QVector) -> bool:
    """Whether no point of ``P`` lies componentwise below ``x`` except ``x`` itself."""
    if not P.contains(x):
        raise PreconditionError(f"{x!r} is not a point of the polyhedron")
    ground = P.ground
    cons = list(P.inequalities)
    for lab in ground.labels:
        cons.append((-QVector.unit(ground, lab), -x[lab]))
    ones = QVector(ground, [1] * len(ground))
    res = lp_solve(cons, ones, "min", equalities=P.equalities)
    if not res.optimal:
        raise AssertionError("bounded minimality LP was not optimal")
    return res.value == sum(x.coords)


def is_bounded_from_below(P: HPolyhedron, V: Optional[VRepresentation] = None) -> bool:
    """True iff every ray (and no line) of ``P`` is componentwise nonnegative."""
    if V is None:
        V = dd_convert(P)
    if V.is_empty:
        return True
    if V.lineality:
        return False
    return all(r.is_positive() for r in V.rays)


def relint_point(P: HPolyhedron, V: Optional[VRepresentation] = None) -> Optional[QVector]:
    if V is None:
        V = dd_convert(P)
    if V.is_empty:
        return None
    n = len(V.vertices)
    pt = QVector.zero(P.ground)
    for v in V.vertices:
        pt = pt + v
    pt = pt * Fraction(1, n)
    for r in V.rays:
        pt = pt + r
    return pt


def inequality_valid(P: HPolyhedron, a: QVector, b, V: Optional[VRepresentation] = None) -> bool:
    """Whether ``<a, x> >= b`` holds on all of ``P``.

    With a V-representation this is a vertex/ray check; otherwise an LP.
    """
    b = Q(b)
    if V is not None:
        if V.is_empty:
            return True
        if any(a.dot(l) != 0 for l in V.lineality):
            return False
        if any(a.dot(r) < 0 for r in V.rays):
            return False
        return min(a.dot(v) for v in V.vertices) >= b
    # dual: max <rhs, y> with sum y_i a_i = a, y >= 0 on inequalities, free on equalities
    cols = [list(ai.coords) for ai, _ in P.inequalities]
    cost = [bi for _, bi in P.inequalities]
    for ai, bi in P.equalities:
        cols += [list(ai.coords), [-x for x in ai.coords]]
        cost += [bi, -bi]
    A = [[col[k] for col in cols] for k in range(P.dim)]
    res = lp_standard(A, list(a.coords), cost, "max")
    if res.status == "unbounded":
        return True  # P is empty
    if res.status == "infeasible":
        # the minimum is unbounded below unless P is empty
        return lp_solve(P.inequalities, [0] * P.dim, "min", equalities=P.equalities).status \
            == "infeasible"
    return res.value >= b


# -- canonical form --------------------------------------------------------------

def affine_hull_equations(P: HPolyhedron, V: VRepresentation) -> list:
    """Primitive integer equations ``(n, c)`` cutting out the affine hull of ``P``."""
    d = P.dim
    v0 = V.vertices[0].coords
    dirs = [[x - y for x, y in zip(v.coords, v0)] for v in V.vertices[1:]]
    dirs += [list(r.coords) for r in V.rays] + [list(l.coords) for l in V.lineality]
    dirs = [r for r in dirs if any(r)]
    normals = nullspace(dirs, d) if dirs else nullspace([], d)
    if not normals:
        return []
    M, _ = rref(normals, d)
    out = []
    for r in M:
        if any(r):
            n = primitive(r, sign_normalize=True)
            c = sum((Fraction(x) * y for x, y in zip(n, v0)), Fraction(0))
            out.append((n, c))
    return out


def canonicalize(P: HPolyhedron, V: Optional[VRepresentation] = None,
                 cap: int = DEFAULT_CAP) -> HPolyhedron:
    """Irredundant H-representation in a canonical syntactic form.

    Implicit equalities become explicit (reduced echelon, primitive integer,
    positive leading entry); each inequality is reduced modulo the
    equalities, scaled to a primitive integer normal, filtered to facets and
    sorted.
    """
    if V is None:
        V = dd_convert(P, cap=cap)
    g = P.ground
    if V.is_empty:
        return HPolyhedron(g, ((QVector.zero(g), Fraction(1)),), ())
    eqs = affine_hull_equations(P, V)
    E = [[Fraction(x) for x in n] for n, _ in eqs]
    Ec = [c for _, c in eqs]
    # eqs are in reduced echelon form: pivot = first nonzero entry
    pivots = [next(j for j, x in enumerate(r) if x) for r in E]
    dimP = P.dim - len(eqs)
    seen = set()
    ineqs = []
    for a, b in P.inequalities:
        a = list(a.coords)
        for r, c, pc in zip(E, Ec, pivots):
            f = a[pc] / r[pc]
            if f:
                a = [x - f * y for x, y in zip(a, r)]
                b = b - f * c
        if not any(a):
            continue
        scale_row = integer_row(a)
        ratio = next(Fraction(s) / x for s, x in zip(scale_row, a) if x)
        an = tuple(scale_row)
        bn = b * ratio
        key = (an, bn)
        if key in seen:
            continue
        aq = QVector(g, an)
        tight_v = [v for v in V.vertices if aq.dot(v) == bn]
        if not tight_v:
            continue
        v0 = tight_v[0].coords
        dirs = [[x - y for x, y in zip(v.coords, v0)] for v in tight_v[1:]]
        dirs += [list(r.coords) for r in V.rays if aq.dot(r) == 0]
        dirs += [list(l.coords) for l in V.lineality]
        if (rank(dirs) if dirs else 0) != dimP - 1:
            continue
        seen.add(key)
        ineqs.append(key)
    ineqs.sort()
    return HPolyhedron(g, tuple((QVector(g, a), b) for a, b in ineqs),
                       tuple((QVector(g, n), c) for n, c in eqs))
