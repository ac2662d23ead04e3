"""Exact rational scalars, ground-set indexed vectors, linear solving and LP.

Everything here works over :class:`fractions.Fraction`; there is no floating
point anywhere.  Vectors are indexed by the labels of a :class:`GroundSet`
rather than by position so that coordinates never get silently permuted when
vectors from different configurations meet.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .errors import UsageError

Rational = Fraction


def Q(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise UsageError(f"not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise UsageError(f"not an exact rational: {value!r}")


def parse_rational(text: str) -> Fraction:
    s = text.strip()
    if not s:
        raise UsageError("empty rational")
    if "." in s or "e" in s.lower():
        raise UsageError(f"decimal notation is not exact, use p/q: {text!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse rational {text!r}") from exc


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def natural_key(label: str):
    """Sort key putting integer-looking labels in numeric order."""
    try:
        return (0, int(label), label)
    except ValueError:
        return (1, 0, label)


class GroundSet:
    """An ordered finite set of string labels.

    The order given at construction is the canonical coordinate order used
    for serialization and lexicographic comparisons.
    """

    __slots__ = ("labels", "_index")

    def __init__(self, labels: Iterable):
        labels = tuple(str(x) for x in labels)
        if not labels:
            raise UsageError("ground set must be nonempty")
        index = {x: i for i, x in enumerate(labels)}
        if len(index) != len(labels):
            raise UsageError(f"duplicate labels in ground set {labels}")
        self.labels = labels
        self._index = index

    @classmethod
    def sorted(cls, labels: Iterable) -> "GroundSet":
        return cls(sorted((str(x) for x in labels), key=natural_key))

    def index(self, label) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise UsageError(f"{label!r} is not in the ground set") from None

    def __contains__(self, label) -> bool:
        return str(label) in self._index

    def __iter__(self):
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, GroundSet) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"GroundSet({list(self.labels)})"


class QVector:
    """Immutable rational vector with one coordinate per ground-set label."""

    __slots__ = ("ground", "coords")

    def __init__(self, ground: GroundSet, coords: Sequence):
        if len(coords) != len(ground):
            raise UsageError(
                f"vector has {len(coords)} coordinates, ground set has {len(ground)}")
        self.ground = ground
        self.coords = tuple(Q(c) for c in coords)

    @classmethod
    def from_mapping(cls, ground: GroundSet, values: Mapping) -> "QVector":
        extra = set(map(str, values)) - set(ground.labels)
        if extra:
            raise UsageError(f"labels outside the ground set: {sorted(extra)}")
        return cls(ground, [Q(values.get(x, 0)) for x in ground.labels])

    @classmethod
    def zero(cls, ground: GroundSet) -> "QVector":
        return cls(ground, (Fraction(0),) * len(ground))

    @classmethod
    def unit(cls, ground: GroundSet, label) -> "QVector":
        c = [Fraction(0)] * len(ground)
        c[ground.index(label)] = Fraction(1)
        return cls(ground, c)

    def __getitem__(self, label) -> Fraction:
        return self.coords[self.ground.index(label)]

    def __iter__(self):
        return iter(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def items(self):
        return zip(self.ground.labels, self.coords)

    def _check(self, other: "QVector"):
        if self.ground != other.ground:
            raise UsageError("vectors live over different ground sets")

    def __add__(self, other: "QVector") -> "QVector":
        self._check(other)
        return QVector(self.ground, [a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other: "QVector") -> "QVector":
        self._check(other)
        return QVector(self.ground, [a - b for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "QVector":
        return QVector(self.ground, [-a for a in self.coords])

    def __mul__(self, scalar) -> "QVector":
        s = Q(scalar)
        return QVector(self.ground, [s * a for a in self.coords])

    __rmul__ = __mul__

    def dot(self, other) -> Fraction:
        if isinstance(other, QVector):
            self._check(other)
            other = other.coords
        return sum((a * b for a, b in zip(self.coords, other) if a and b), Fraction(0))

    def leq(self, other: "QVector") -> bool:
        """Componentwise order: ``self`` is below ``other`` in every coordinate."""
        self._check(other)
        return all(a <= b for a, b in zip(self.coords, other.coords))

    def is_positive(self) -> bool:
        return all(a >= 0 for a in self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __eq__(self, other) -> bool:
        return (isinstance(other, QVector) and self.ground == other.ground
                and self.coords == other.coords)

    def __lt__(self, other: "QVector") -> bool:
        return self.coords < other.coords

    def __hash__(self) -> int:
        return hash((self.ground.labels, self.coords))

    def __repr__(self) -> str:
        body = ", ".join(f"{x}: {format_rational(c)}" for x, c in self.items())
        return f"QVector({{{body}}})"

    def to_json(self) -> dict:
        return {x: format_rational(c) for x, c in self.items()}

    @classmethod
    def from_json(cls, ground: GroundSet, data: Mapping) -> "QVector":
        return cls.from_mapping(ground, {k: parse_rational(str(v)) for k, v in data.items()})


@dataclass(frozen=True)
class QMatrix:
    """A rectangular stack of row vectors over one ground set."""

    rows: tuple

    def __post_init__(self):
        grounds = {r.ground for r in self.rows}
        if len(grounds) > 1:
            raise UsageError("matrix rows live over different ground sets")

    @property
    def shape(self):
        n = len(self.rows[0]) if self.rows else 0
        return len(self.rows), n

    def rank(self) -> int:
        return rank([r.coords for r in self.rows])


# -- linear algebra ----------------------------------------------------------

def _as_rows(A) -> list:
    if isinstance(A, QMatrix):
        return [list(r.coords) for r in A.rows]
    return [[Q(x) for x in (r.coords if isinstance(r, QVector) else r)] for r in A]


def rref(rows: Sequence[Sequence], ncols: Optional[int] = None):
    """Reduced row echelon form.  Returns ``(matrix, pivot_columns)``."""
    M = [[Q(x) for x in r] for r in rows]
    if ncols is None:
        ncols = len(M[0]) if M else 0
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(M):
            break
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        if piv != 1:
            M[r] = [x / piv for x in M[r]]
        row = M[r]
        nz = [j for j in range(c, len(row)) if row[j] != 0]
        for i in range(len(M)):
            if i != r:
                f = M[i][c]
                if f != 0:
                    Mi = M[i]
                    for j in nz:
                        Mi[j] -= f * row[j]
        pivots.append(c)
        r += 1
    return M, pivots


def rank(rows: Sequence[Sequence]) -> int:
    rows = [r for r in rows]
    if not rows:
        return 0
    # fraction-free elimination on integer-scaled rows is much faster
    M = [integer_row(r) for r in rows]
    ncols = len(M[0])
    rk = 0
    for c in range(ncols):
        p = next((i for i in range(rk, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[rk], M[p] = M[p], M[rk]
        pr = M[rk]
        a = pr[c]
        for i in range(rk + 1, len(M)):
            b = M[i][c]
            if b:
                Mi = M[i]
                new = [a * x - b * y for x, y in zip(Mi, pr)]
                g = 0
                for x in new:
                    if x:
                        g = math.gcd(g, x)
                        if g == 1:
                            break
                M[i] = [x // g for x in new] if g > 1 else new
        rk += 1
        if rk == len(M):
            break
    return rk


def nullspace(rows: Sequence[Sequence], ncols: int) -> list:
    """Basis of ``{x : rows @ x = 0}``, one vector per free column."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    M, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -M[r][f]
        basis.append(v)
    return basis


def solve_linear(A, b):
    """Solve ``A x = b`` exactly.

    Returns ``None`` when the system is inconsistent, otherwise a pair
    ``(particular, nullspace_basis)``; the particular solution sets every
    free variable to zero.  When ``A`` is a :class:`QMatrix` (or a list of
    QVectors) the results are QVectors over the same ground set.
    """
    ground = None
    if isinstance(A, QMatrix) and A.rows:
        ground = A.rows[0].ground
    elif A and isinstance(A[0], QVector):
        ground = A[0].ground
    rows = _as_rows(A)
    rhs = [Q(x) for x in (b.coords if isinstance(b, QVector) else b)]
    if len(rows) != len(rhs):
        raise UsageError(f"{len(rows)} equations but {len(rhs)} right-hand sides")
    if ground is not None:
        ncols = len(ground)
    elif rows:
        ncols = len(rows[0])
    else:
        raise UsageError("cannot infer the number of unknowns of an empty system")
    if any(len(r) != ncols for r in rows):
        raise UsageError("ragged coefficient matrix")
    aug = [r + [y] for r, y in zip(rows, rhs)]
    M, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = M[r][ncols]
    basis = nullspace([r[:ncols] for r in M[:len(pivots)]], ncols)
    if ground is not None:
        return QVector(ground, x), [QVector(ground, v) for v in basis]
    return x, basis


def integer_row(row: Sequence) -> list:
    """Scale a rational row by a positive factor to a primitive integer row."""
    den = 1
    for x in row:
        d = x.denominator if isinstance(x, Fraction) else 1
        if d != 1:
            den = den * d // math.gcd(den, d)
    ints = [x.numerator * (den // x.denominator) if isinstance(x, Fraction) else int(x) * den
            for x in row]
    g = 0
    for x in ints:
        if x:
            g = math.gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    return ints


def primitive(row: Sequence, sign_normalize: bool = False) -> tuple:
    """Primitive integer multiple of ``row``; optionally with positive leading entry."""
    ints = integer_row([Q(x) for x in row])
    if sign_normalize:
        lead = next((x for x in ints if x), 0)
        if lead < 0:
            ints = [-x for x in ints]
    return tuple(ints)


# -- linear programming --------------------------------------------------------

@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "unbounded" | "infeasible"
    point: Optional[object] = None
    value: Optional[Fraction] = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Dense simplex tableau over Fractions; Bland's rule throughout."""

    def __init__(self, rows, rhs, basis):
        self.T = rows
        self.b = rhs
        self.basis = basis

    def pivot(self, r, c):
        T, b = self.T, self.b
        row = T[r]
        piv = row[c]
        if piv != 1:
            inv = 1 / piv
            for j in range(len(row)):
                if row[j]:
                    row[j] *= inv
            b[r] *= inv
        nz = [j for j, v in enumerate(row) if v]
        br = b[r]
        for i, other in enumerate(T):
            if i != r:
                f = other[c]
                if f:
                    for j in nz:
                        other[j] -= f * row[j]
                    b[i] -= f * br
        self.basis[r] = c

    def reduced_costs(self, cost, allowed):
        T = self.T
        cb = [cost[j] for j in self.basis]
        red = []
        for j in range(len(cost)):
            if not allowed[j]:
                red.append(None)
                continue
            z = cost[j]
            for i, c in enumerate(cb):
                if c:
                    v = T[i][j]
                    if v:
                        z -= c * v
            red.append(z)
        return red

    def optimize(self, cost, allowed):
        """Minimize ``cost`` over the current basis; returns False if unbounded."""
        T, b = self.T, self.b
        red = self.reduced_costs(cost, allowed)
        while True:
            enter = next((j for j, z in enumerate(red) if z is not None and z < 0), None)
            if enter is None:
                return True
            best = None
            for i in range(len(T)):
                a = T[i][enter]
                if a > 0:
                    ratio = b[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            r = best[1]
            self.pivot(r, enter)
            # the pivot row is normalized now; eliminate the entering column from red
            f = red[enter]
            row = T[r]
            for j, v in enumerate(row):
                if v and red[j] is not None:
                    red[j] -= f * v


def lp_standard(A, b, c, sense: str = "min") -> LPResult:
    """Optimize ``<c, y>`` over ``{y >= 0 : A y = b}``.

    A leaner entry point than :func:`lp_solve` for problems already in
    standard form: the tableau has one row per equality.
    """
    if sense not in ("min", "max"):
        raise UsageError(f"sense must be 'min' or 'max', not {sense!r}")
    c = [Q(x) for x in c]
    n = len(c)
    m = len(A)
    rows, rhs = [], []
    for i in range(m):
        row = [Q(x) for x in A[i]] + [Fraction(0)] * m
        bb = Q(b[i])
        if bb < 0:
            row = [-x for x in row]
            bb = -bb
        row[n + i] = Fraction(1)
        rows.append(row)
        rhs.append(bb)
    tab = _Tableau(rows, rhs, [n + i for i in range(m)])
    allowed = [True] * (n + m)
    if m:
        tab.optimize([Fraction(0)] * n + [Fraction(1)] * m, allowed)
        if sum(tab.b[i] for i in range(len(tab.T)) if tab.basis[i] >= n) > 0:
            return LPResult("infeasible")
        i = 0
        while i < len(tab.T):
            if tab.basis[i] >= n:
                col = next((j for j in range(n) if tab.T[i][j] != 0), None)
                if col is None:
                    del tab.T[i], tab.b[i], tab.basis[i]
                    continue
                tab.pivot(i, col)
            i += 1
        for j in range(n, n + m):
            allowed[j] = False
    sign = 1 if sense == "min" else -1
    if not tab.optimize([sign * x for x in c] + [Fraction(0)] * m, allowed):
        return LPResult("unbounded")
    y = [Fraction(0)] * (n + m)
    for i, j in enumerate(tab.basis):
        y[j] = tab.b[i]
    y = y[:n]
    return LPResult("optimal", tuple(y), sum((ci * yi for ci, yi in zip(c, y)), Fraction(0)))


def lp_solve(constraints, objective, sense: str = "min", equalities=()) -> LPResult:
    """Optimize a linear objective over ``{x : <a, x> >= b for (a, b) in constraints}``.

    ``equalities`` holds extra ``(a, b)`` pairs meaning ``<a, x> = b``.  All
    variables are free.  The simplex runs in two phases over Fractions with
    Bland's rule, so the returned vertex is reproducible.
    """
    if sense not in ("min", "max"):
        raise UsageError(f"sense must be 'min' or 'max', not {sense!r}")
    ground = objective.ground if isinstance(objective, QVector) else None
    c = [Q(x) for x in (objective.coords if isinstance(objective, QVector) else objective)]
    n = len(c)

    def coeffs(a):
        v = a.coords if isinstance(a, QVector) else [Q(x) for x in a]
        if len(v) != n:
            raise UsageError("constraint and objective dimensions differ")
        return list(v)

    ineqs = [(coeffs(a), Q(bb)) for a, bb in constraints]
    eqs = [(coeffs(a), Q(bb)) for a, bb in equalities]
    m_in, m = len(ineqs), len(ineqs) + len(eqs)
    # columns: p (n), q (n), slacks (m_in), artificials (m)
    ncols = 2 * n + m_in + m
    rows, rhs = [], []
    for i, (a, bb) in enumerate(ineqs + eqs):
        row = [Fraction(0)] * ncols
        for j, x in enumerate(a):
            if x:
                row[j] = x
                row[n + j] = -x
        if i < m_in:
            row[2 * n + i] = Fraction(-1)
        if bb < 0:
            row = [-x for x in row]
            bb = -bb
        row[2 * n + m_in + i] = Fraction(1)
        rows.append(row)
        rhs.append(bb)
    tab = _Tableau(rows, rhs, [2 * n + m_in + i for i in range(m)])
    art0 = 2 * n + m_in
    allowed = [True] * ncols
    if m:
        phase1 = [Fraction(0)] * art0 + [Fraction(1)] * m
        tab.optimize(phase1, allowed)
        if sum(tab.b[i] for i in range(len(tab.T)) if tab.basis[i] >= art0) > 0:
            return LPResult("infeasible")
        # drive artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(tab.T):
            if tab.basis[i] >= art0:
                col = next((j for j in range(art0) if tab.T[i][j] != 0), None)
                if col is None:
                    del tab.T[i], tab.b[i], tab.basis[i]
                    continue
                tab.pivot(i, col)
            i += 1
        for j in range(art0, ncols):
            allowed[j] = False
    sign = 1 if sense == "min" else -1
    cost = [sign * x for x in c] + [-sign * x for x in c] + [Fraction(0)] * (m_in + m)
    if not tab.optimize(cost, allowed):
        return LPResult("unbounded")
    sol = [Fraction(0)] * ncols
    for i, j in enumerate(tab.basis):
        sol[j] = tab.b[i]
    x = [sol[j] - sol[n + j] for j in range(n)]
    value = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    point = QVector(ground, x) if ground is not None else tuple(x)
    return LPResult("optimal", point, value)
