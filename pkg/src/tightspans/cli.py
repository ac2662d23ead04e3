"""The ``tsk`` command line tool.

Exit codes: 0 on success (including "not a tree"), 2 for bad input or
arguments, 3 when the enumeration cap is exceeded and 4 when a checked
identity fails.
"""
from __future__ import annotations

import argparse
import itertools
import random
import sys
from dataclasses import dataclass
from typing import Optional

from .configurations import build_configuration, enumerate_splits, splits_compatible
from .engine import (check_shift, is_tree, split_decomposition, tight_span_of,
                     verify_duality)
from .errors import (EnumerationCapError, InvariantError, ParseError, PreconditionError,
                     TightSpanError, UsageError, ValidationError)
from .exact import QVector
from .io import (INPUT_KINDS, complex_dot, parse_input, realisation_dot, to_json_bytes)
from .maps import DirectedMap, Diversity, KDissimilarity, SymmetricMap, make_weight
from .polyhedron import DEFAULT_CAP
from .trees import (DirectedPartialSplit, PartialSplit, WeightedSplitSystem,
                    incompatible_pair, map_from_splits, realisation_from_splits,
                    reconstruct_diversity_tree, to_newick, tree_from_splits,
                    verify_tightspan_equal)

COMMANDS = ("compute", "check-tree", "splits", "decompose", "verify")
FORMATS = ("json", "dot", "newick")
CHECKS = ("duality", "tightspan-equal", "shift", "tree")

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_INVARIANT = 0, 2, 3, 4
MAX_REPORTED = 20


@dataclass
class JobSpec:
    command: str
    kind: str
    path: str
    out: str = "json"
    cap: int = DEFAULT_CAP
    method: str = "auto"
    obj: Optional[str] = None
    check: Optional[str] = None
    seed: int = 0
    approx: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.kind not in INPUT_KINDS:
            raise UsageError(f"unknown input kind {self.kind!r}")
        if self.out not in FORMATS:
            raise UsageError(f"unknown output format {self.out!r}")
        if self.out == "newick" and self.command != "check-tree":
            raise UsageError("newick output is only produced by check-tree")
        if self.out == "dot" and self.command not in ("compute", "check-tree"):
            raise UsageError(f"{self.command} has no DOT output")
        if self.kind == "splits" and self.command != "verify":
            raise UsageError("split-system input is only read by verify")
        if self.approx and self.out != "dot":
            raise UsageError("--approx only annotates DOT output")


@dataclass
class Result:
    code: int
    output: bytes


def _configuration(m, obj):
    """The configuration behind ``tight_span_of(m, obj)``."""
    if isinstance(m, SymmetricMap):
        return build_configuration("A", m.ground)
    if isinstance(m, DirectedMap):
        theta = obj in ("Theta", "theta")
        if m.square:
            return build_configuration("B_bar_directed" if theta else "B_directed", m.X)
        return build_configuration("B_bar" if theta else "B", m.X, m.Y)
    if isinstance(m, Diversity):
        if obj in ("T_bar", "Tbar"):
            from .configurations import powerset_ground
            return build_configuration("A", powerset_ground(m.ground))
        return build_configuration("C_cube", m.ground)
    if isinstance(m, KDissimilarity):
        return build_configuration("hypersimplex", m.ground, k=m.k)
    raise UsageError(f"no configuration for {type(m).__name__}")


def _compat_mode(job: JobSpec) -> str:
    return "auto" if job.method == "auto" else job.method


def _compute(job: JobSpec, m) -> Result:
    ts = tight_span_of(m, job.obj, cap=job.cap)
    if job.out == "dot":
        if ts.dimension > 1:
            raise UsageError(f"DOT output needs a complex of dimension at most 1, "
                             f"got {ts.dimension}")
        return Result(EXIT_OK, complex_dot(ts.complex, job.approx).encode())
    return Result(EXIT_OK, to_json_bytes(ts.to_json()))


def _not_a_tree(job: JobSpec, reason: str) -> Result:
    if job.out == "json":
        return Result(EXIT_OK, to_json_bytes({"tree": None, "result": "not a tree",
                                              "reason": reason}))
    return Result(EXIT_OK, b"not a tree\n")


def _check_tree_symmetric(job: JobSpec, m: SymmetricMap) -> Result:
    ts = tight_span_of(m, cap=job.cap)
    if is_tree(ts) is None:
        return _not_a_tree(job, "the tight-span has a face of dimension 2 or more")
    A = ts.config
    dec = split_decomposition(A, ts.weights, method="edges", cap=job.cap,
                              compatibility=_compat_mode(job))
    if dec is None:
        raise InvariantError("the tight-span is a tree but the weights do not decompose")
    splits = tuple(PartialSplit(s.tag.A, s.tag.B) for s in dec.splits)
    S = WeightedSplitSystem(m.ground, splits, dec.alpha).sorted()
    leaf_tree = (all(s.is_full(m.ground) for s in S.splits)
                 and map_from_splits("distance", S) == m)
    if job.out == "dot":
        return Result(EXIT_OK, complex_dot(ts.complex, job.approx).encode())
    if job.out == "newick":
        if not leaf_tree:
            raise UsageError("the tree is not leaf-labelled by X; use --out json")
        return Result(EXIT_OK, (to_newick(tree_from_splits(S)) + "\n").encode())
    out = {"result": "tree", "splits": S.to_json(), "decomposition": dec.to_json()}
    if leaf_tree:
        T = tree_from_splits(S)
        out["tree"] = T.to_json()
        out["newick"] = to_newick(T)
    else:
        out["tree"] = None
    return Result(EXIT_OK, to_json_bytes(out))


ORIENT_LIMIT = 12


def _orient(m: DirectedMap, S: WeightedSplitSystem) -> Optional[WeightedSplitSystem]:
    """Flip full splits ``(A, B)`` to ``(B, A)`` until the sum is ``m`` itself.

    A full split and its reverse induce the same split of the
    configuration and differ by an affine term.  Returns ``None`` when no choice works.
    """
    if len(S.splits) > ORIENT_LIMIT:
        return None
    Xs = frozenset(m.X.labels)
    options = [(s, DirectedPartialSplit(s.B, s.A)) if s.A | s.B == Xs else (s,)
               for s in S.splits]
    for cand in itertools.product(*options):
        T = WeightedSplitSystem(m.X, cand, S.alpha)
        if incompatible_pair(T) is None and map_from_splits("directed", T) == m:
            return T.sorted()
    return None


def _check_tree_directed(job: JobSpec, m: DirectedMap) -> Result:
    if not m.square:
        raise UsageError("check-tree needs a directed map on X × X")
    ts = tight_span_of(m, "Theta", cap=job.cap)
    if is_tree(ts) is None:
        return _not_a_tree(job, "Theta_D has a face of dimension 2 or more")
    dec = split_decomposition(ts.config, ts.weights, method="refinement", cap=job.cap,
                              compatibility=_compat_mode(job))
    if dec is None:
        raise InvariantError("Theta_D is a tree but the weights do not decompose")
    splits = tuple(DirectedPartialSplit(s.tag.A, s.tag.B) for s in dec.splits)
    S = WeightedSplitSystem(m.X, splits, dec.alpha).sorted()
    oriented = _orient(m, S)
    R = realisation_from_splits(oriented) if oriented is not None else None
    if oriented is not None:
        S = oriented
    if job.out == "newick":
        raise UsageError("directed trees have no Newick form; use --out json or dot")
    if job.out == "dot":
        if R is None:
            raise UsageError("no realisation of D itself; use --out json")
        return Result(EXIT_OK, realisation_dot(R, job.approx).encode())
    out = {"result": "tree", "splits": S.to_json(), "decomposition": dec.to_json(),
           "realisation": R.to_json() if R is not None else None}
    if R is not None:
        out["directed_path"] = R.is_directed_path()
    return Result(EXIT_OK, to_json_bytes(out))


def _check_tree_diversity(job: JobSpec, m: Diversity) -> Result:
    found = reconstruct_diversity_tree(m)
    if found is None:
        return _not_a_tree(job, "no weighted tree has this phylogenetic diversity")
    if job.out == "newick":
        return Result(EXIT_OK, (to_newick(found.tree) + "\n").encode())
    if job.out == "dot":
        raise UsageError("diversity trees are written as json or newick")
    out = found.to_json()
    out["result"] = "tree"
    return Result(EXIT_OK, to_json_bytes(out))


def _check_tree(job: JobSpec, m) -> Result:
    if isinstance(m, SymmetricMap):
        return _check_tree_symmetric(job, m)
    if isinstance(m, DirectedMap):
        return _check_tree_directed(job, m)
    if isinstance(m, Diversity):
        return _check_tree_diversity(job, m)
    raise UsageError(f"check-tree does not apply to {job.kind}")


def _splits(job: JobSpec, m) -> Result:
    A = _configuration(m, job.obj)
    splits = enumerate_splits(A)
    mode = "geometric" if job.method == "geometric" else "combinatorial"
    if mode == "combinatorial" and any(s.tag is None for s in splits):
        mode = "geometric"
    pairs = []
    for i in range(len(splits)):
        for j in range(i + 1, len(splits)):
            if splits_compatible(A, splits[i], splits[j], mode):
                pairs.append([i, j])
    out = {"configuration": A.kind, "count": len(splits),
           "splits": [s.to_json(A) for s in splits],
           "compatible_pairs": pairs, "compatibility": mode}
    return Result(EXIT_OK, to_json_bytes(out))


def _decompose(job: JobSpec, m) -> Result:
    A = _configuration(m, job.obj)
    w = make_weight(m, A)
    dec = split_decomposition(A, w, method="refinement", cap=job.cap,
                              compatibility=_compat_mode(job))
    if dec is None:
        return Result(EXIT_OK, to_json_bytes({"decomposition": None,
                                              "configuration": A.kind}))
    out = dec.to_json()
    out["configuration"] = A.kind
    return Result(EXIT_OK, to_json_bytes(out))


def _verify(job: JobSpec, m) -> Result:
    check = job.check
    if check is None:
        raise UsageError("verify needs --check")
    if check == "tightspan-equal":
        if not isinstance(m, WeightedSplitSystem):
            raise UsageError("tightspan-equal reads a split system (--kind splits)")
        rep = verify_tightspan_equal(m, seed=job.seed)
        return Result(EXIT_OK if rep.ok else EXIT_INVARIANT, to_json_bytes(rep.to_json()))
    if isinstance(m, WeightedSplitSystem):
        raise UsageError(f"--check {check} reads a map, not a split system")
    A = _configuration(m, job.obj)
    w = make_weight(m, A)
    if check == "duality":
        rep = verify_duality(A, w, cap=job.cap)
        return Result(EXIT_OK if rep.ok else EXIT_INVARIANT, to_json_bytes(rep.to_json(A)))
    if check == "shift":
        rng = random.Random(job.seed)
        v = QVector(A.ground, [rng.randint(-3, 3) for _ in A.ground.labels])
        ok = check_shift(A, w, v)
        out = {"ok": ok, "shift": v.to_json()}
        return Result(EXIT_OK if ok else EXIT_INVARIANT, to_json_bytes(out))
    if check == "tree":
        if not isinstance(m, SymmetricMap):
            raise UsageError("--check tree compares a symmetric map with the four-point condition")
        from .maps import validate
        four = not validate(m, "four_point")
        tree = is_tree(tight_span_of(m, cap=job.cap)) is not None
        out = {"ok": four == tree, "four_point": four, "tree": tree}
        return Result(EXIT_OK if four == tree else EXIT_INVARIANT, to_json_bytes(out))
    raise UsageError(f"unknown check {check!r}")


_HANDLERS = {"compute": _compute, "check-tree": _check_tree, "splits": _splits,
             "decompose": _decompose, "verify": _verify}


def run(job: JobSpec) -> Result:
    """Run one job; errors propagate as exceptions."""
    job.validate()
    m = parse_input(job.path, job.kind)
    return _HANDLERS[job.command](job, m)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsk", description="Exact tight-spans and tree tests.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--kind", required=True, choices=INPUT_KINDS)
    p.add_argument("--in", dest="path", required=True, metavar="PATH")
    p.add_argument("--out", default="json", choices=FORMATS)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP,
                   help="largest ambient dimension for full vertex enumeration")
    p.add_argument("--method", default="auto", choices=("auto", "geometric", "combinatorial"),
                   help="split compatibility test")
    p.add_argument("--object", dest="obj", default=None,
                   choices=("T", "Theta", "T_bar"),
                   help="which tight-span for directed maps and diversities")
    p.add_argument("--check", default=None, choices=CHECKS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--approx", action="store_true", help="decimal annotations in DOT labels")
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    job = JobSpec(args.command, args.kind, args.path, args.out, args.cap, args.method,
                  args.obj, args.check, args.seed, args.approx)
    try:
        res = run(job)
    except ValidationError as exc:
        label = "parse error" if isinstance(exc, ParseError) else "validation error"
        print(f"tsk: {label}: {exc}", file=sys.stderr)
        for v in exc.violations[:MAX_REPORTED]:
            print(f"  {v}", file=sys.stderr)
        if len(exc.violations) > MAX_REPORTED:
            print(f"  ... and {len(exc.violations) - MAX_REPORTED} more", file=sys.stderr)
        return EXIT_INPUT
    except (UsageError, PreconditionError) as exc:
        print(f"tsk: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EnumerationCapError as exc:
        print(f"tsk: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InvariantError as exc:
        print(f"tsk: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except TightSpanError as exc:
        print(f"tsk: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.buffer.write(res.output)
    sys.stdout.flush()
    return res.code
