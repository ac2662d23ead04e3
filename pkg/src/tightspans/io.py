"""Reading maps from PHYLIP or JSON files and writing JSON, DOT and Newick."""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .configurations import parse_subset_label
from .errors import ParseError, UsageError, ValidationError
from .exact import GroundSet, format_rational, parse_rational
from .maps import (DirectedMap, Distance, Diversity, KDissimilarity, Metric, SymmetricMap,
                   validate)
from .trees import DirectedPartialSplit, PartialSplit, WeightedSplitSystem

INPUT_KINDS = ("metric", "distance", "symmetric", "directed", "diversity", "kdiss", "splits")

_SYMMETRIC = {"metric": Metric, "distance": Distance, "symmetric": SymmetricMap}


def _rational(value, where: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ParseError(f"{where}: write rationals as integers or \"p/q\" strings, got {value!r}")
    try:
        return parse_rational(str(value))
    except UsageError as exc:
        raise ParseError(f"{where}: {exc}") from None


# -- PHYLIP ------------------------------------------------------------------------

def parse_phylip(text: str) -> tuple:
    """Labels and a full square matrix from square or lower-triangular PHYLIP text.

    Lower-triangular rows may include or omit the diagonal.
    """
    lines = [(n, l.split()) for n, l in enumerate(text.splitlines(), 1) if l.strip()]
    if not lines:
        raise ParseError("empty input")
    n0, head = lines[0]
    try:
        n = int(head[0])
    except ValueError:
        raise ParseError(f"line {n0}: expected the number of taxa") from None
    rows = lines[1:]
    if len(rows) != n:
        raise ParseError(f"expected {n} matrix rows, found {len(rows)}")
    labels, vals = [], []
    for i, (ln, toks) in enumerate(rows):
        labels.append(toks[0])
        entries = [_rational(t, f"line {ln}, field {k + 2}") for k, t in enumerate(toks[1:])]
        if len(entries) not in (n, i, i + 1):
            raise ParseError(f"line {ln}: expected {n}, {i} or {i + 1} values, found {len(entries)}")
        vals.append(entries)
    shapes = {len(r) - i for i, r in enumerate(vals)}
    if all(len(r) == n for r in vals):
        M = vals
    elif shapes in ({0}, {1}):
        diag = shapes == {1}
        M = [[Fraction(0)] * n for _ in range(n)]
        for i, r in enumerate(vals):
            for j, v in enumerate(r):
                M[i][j] = M[j][i] = v
        if not diag:
            for i in range(n):
                M[i][i] = Fraction(0)
    else:
        raise ParseError("rows mix square and lower-triangular layouts")
    if len(set(labels)) != n:
        raise ParseError("duplicate taxon labels")
    return labels, M


# -- JSON --------------------------------------------------------------------------

def _matrix(data, key: str, nrows: int, ncols: int) -> list:
    rows = data.get(key)
    if not isinstance(rows, list) or len(rows) != nrows:
        raise ParseError(f"field {key!r}: expected {nrows} rows")
    out = []
    for i, r in enumerate(rows):
        if not isinstance(r, list) or len(r) != ncols:
            raise ParseError(f"field {key!r}, row {i + 1}: expected {ncols} entries")
        out.append([_rational(v, f"{key}[{i + 1}][{j + 1}]") for j, v in enumerate(r)])
    return out


def _labels(data, key: str) -> list:
    v = data.get(key)
    if not isinstance(v, list) or not v:
        raise ParseError(f"field {key!r}: expected a nonempty list of labels")
    return [str(x) for x in v]


def _pair_values(data: dict, labels: list) -> dict:
    out = {}
    for k, v in data.items():
        parts = k.split(",")
        if len(parts) != 2:
            raise ParseError(f"key {k!r}: expected \"x,y\"")
        out[tuple(p.strip() for p in parts)] = _rational(v, f"values[{k!r}]")
    return out


def _symmetric_from_json(cls, data: dict):
    labels = _labels(data, "ground")
    if "matrix" in data:
        M = _matrix(data, "matrix", len(labels), len(labels))
        for i in range(len(labels)):
            for j in range(i + 1, len(labels)):
                if M[i][j] != M[j][i]:
                    raise ValidationError(
                        f"matrix is not symmetric at ({labels[i]}, {labels[j]})",
                        [f"D({labels[i]},{labels[j]}) = {format_rational(M[i][j])} but "
                         f"D({labels[j]},{labels[i]}) = {format_rational(M[j][i])}"])
        return cls.from_matrix(labels, M)
    if "values" in data:
        return cls(labels, _pair_values(data["values"], labels))
    raise ParseError("expected a \"matrix\" or \"values\" field")


def _diversity_from_json(data: dict) -> Diversity:
    values = data.get("values", data if "ground" not in data else None)
    if not isinstance(values, dict):
        raise ParseError("expected a \"values\" object keyed by subsets like \"{1,2}\"")
    parsed = {}
    for k, v in values.items():
        try:
            S = parse_subset_label(k)
        except Exception:
            raise ParseError(f"key {k!r}: expected a subset label like \"{{1,2}}\"") from None
        parsed[S] = _rational(v, f"values[{k!r}]")
    if "ground" in data:
        labels = _labels(data, "ground")
    else:
        from .exact import natural_key
        labels = sorted(frozenset().union(*parsed), key=natural_key) if parsed else []
    if not labels:
        raise ParseError("diversity has an empty ground set")
    return Diversity(labels, parsed)


def _kdiss_from_json(data: dict) -> KDissimilarity:
    labels = _labels(data, "ground")
    k = data.get("k")
    if not isinstance(k, int):
        raise ParseError("field 'k': expected an integer")
    vals = {}
    for key, v in data.get("values", {}).items():
        vals[parse_subset_label(key)] = _rational(v, f"values[{key!r}]")
    return KDissimilarity(labels, k, vals)


def _directed_from_json(data: dict) -> DirectedMap:
    X = _labels(data, "X" if "X" in data else "ground")
    Y = _labels(data, "Y") if "Y" in data else None
    M = _matrix(data, "matrix", len(X), len(Y or X))
    return DirectedMap.from_matrix(X, M, Y)


def _splits_from_json(data: dict) -> WeightedSplitSystem:
    labels = _labels(data, "ground")
    directed = bool(data.get("directed", False))
    cls = DirectedPartialSplit if directed else PartialSplit
    splits, alpha = [], []
    for i, s in enumerate(data.get("splits", [])):
        try:
            splits.append(cls([str(x) for x in s["A"]], [str(x) for x in s["B"]]))
        except KeyError:
            raise ParseError(f"splits[{i}]: expected fields \"A\" and \"B\"") from None
        alpha.append(_rational(s.get("alpha", 1), f"splits[{i}].alpha"))
    return WeightedSplitSystem(GroundSet(labels), tuple(splits), tuple(alpha))


def parse_text(text: str, kind: str, fmt: str = "auto"):
    """Parse ``text`` as a value of ``kind`` (see :data:`INPUT_KINDS`)."""
    if kind not in INPUT_KINDS:
        raise UsageError(f"unknown input kind {kind!r}")
    if fmt == "auto":
        fmt = "json" if text.lstrip().startswith("{") else "phylip"
    if fmt == "phylip":
        if kind not in _SYMMETRIC and kind != "directed":
            raise ParseError(f"PHYLIP input is only accepted for matrix kinds, not {kind}")
        labels, M = parse_phylip(text)
        if kind == "directed":
            return DirectedMap.from_matrix(labels, M)
        for i in range(len(labels)):
            for j in range(i + 1, len(labels)):
                if M[i][j] != M[j][i]:
                    raise ValidationError(
                        f"matrix is not symmetric at ({labels[i]}, {labels[j]})",
                        [f"D({labels[i]},{labels[j]}) = {format_rational(M[i][j])} but "
                         f"D({labels[j]},{labels[i]}) = {format_rational(M[j][i])}"])
        return _SYMMETRIC[kind].from_matrix(labels, M)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ParseError("top-level JSON value must be an object")
    if kind in _SYMMETRIC:
        return _symmetric_from_json(_SYMMETRIC[kind], data)
    if kind == "directed":
        return _directed_from_json(data)
    if kind == "diversity":
        return _diversity_from_json(data)
    if kind == "kdiss":
        return _kdiss_from_json(data)
    return _splits_from_json(data)


def parse_input(path, kind: str, fmt: str = "auto", check: bool = True):
    """Read and validate a map; axiom violations raise :class:`ValidationError`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    value = parse_text(text, kind, fmt)
    if check and kind not in ("splits", "kdiss"):
        violations = validate(value, kind)
        if violations:
            raise ValidationError(f"input violates the {kind} axioms", violations)
    return value


# -- export ------------------------------------------------------------------------

def to_json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode()


def _coords(v, approx: bool) -> str:
    txt = "(" + ",".join(format_rational(c) for c in v.coords) + ")"
    if approx:
        txt += " ~ (" + ",".join(f"{float(c):.4g}" for c in v.coords) + ")"
    return txt


def complex_dot(C, approx: bool = False) -> str:
    """DOT text of the vertices and edges of a bounded complex.

    Edge ``len`` is the maximum norm of the exact edge vector.
    """
    from .engine import max_norm

    used = sorted(set().union(*(f.vertex_ids for f in C.faces))) if C.faces else []
    lines = ["graph tightspan {"]
    for i in used:
        lines.append(f'  v{i} [label="{_coords(C.vertices[i], approx)}"];')
    for i, j in sorted(C.edges):
        l = format_rational(max_norm(C.edge_vector(i, j)))
        lines.append(f'  v{i} -- v{j} [len="{l}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def realisation_dot(R, approx: bool = False) -> str:
    lines = ["digraph realisation {"]
    members = {}
    for x, F in sorted(R.family.items()):
        for v in F:
            members.setdefault(v, []).append(x)
    for v in R.vertices:
        lab = ",".join(sorted(members.get(v, [])))
        lines.append(f'  {v} [label="{v}: {lab}"];')
    for u, v, a in R.arcs:
        extra = f' label="{float(a):.4g}"' if approx else ""
        lines.append(f'  {u} -> {v} [len="{format_rational(a)}"{extra}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
