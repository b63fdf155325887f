"""Connector and Gray Code Verification Service

This module is the trusted checker. It only depends on the value types
and never calls solver code.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from cubepaths.models.connector import Connector
from cubepaths.models.hypercube import Vertex
from cubepaths.models.pairset import PairSet


@dataclass(frozen=True)
class Violation:
    """First failed clause of a check, with the offending vertices"""

    clause: str
    detail: str
    witnesses: Tuple[str, ...] = field(default=())

    def __str__(self) -> str:
        return f"{self.clause}: {self.detail}"


def _violation(clause: str, detail: str, *vertices: Vertex) -> Violation:
    return Violation(clause, detail, tuple(str(v) for v in vertices))


def check(A: PairSet, C: Connector) -> Optional[Violation]:
    """
    Check that C is a connector of A.

    Clauses, in the order they are tested: ``dimension``, ``bijection``
    (one path per pair), ``endpoint`` (path ends equal the pair, singleton
    path exactly for degenerate pairs), ``adjacency`` (consecutive vertices
    at distance 1), ``coverage`` (every vertex of Q_n exactly once).

    Returns:
        None when C is a connector of A, else the first Violation
    """
    n = A.dim
    if C.dim != n:
        return Violation("dimension", f"connector has dimension {C.dim}, pair-set {n}")
    if len(C.paths) != len(A.pairs):
        return Violation(
            "bijection", f"{len(C.paths)} paths for {len(A.pairs)} pairs"
        )

    seen = bytearray(1 << n)
    total = 0
    for pair, path in zip(A.pairs, C.paths):
        if not path:
            return _violation("bijection", "empty path", pair.a, pair.b)
        for v in path:
            if v.dim != n:
                return _violation("dimension", f"vertex of dimension {v.dim}", v)
        ends = {path[0], path[-1]}
        if ends != {pair.a, pair.b}:
            return _violation(
                "endpoint", f"path ends {path[0]}..{path[-1]} do not match pair",
                pair.a, pair.b,
            )
        if pair.is_degenerate != (len(path) == 1):
            return _violation(
                "endpoint", "singleton paths must match degenerate pairs", pair.a, pair.b
            )
        for u, w in zip(path, path[1:]):
            if (u.bits ^ w.bits).bit_count() != 1:
                return _violation("adjacency", "consecutive vertices not adjacent", u, w)
        for v in path:
            if seen[v.bits]:
                return _violation("coverage", "vertex visited twice", v)
            seen[v.bits] = 1
        total += len(path)

    if total != 1 << n:
        missing = next(b for b in range(1 << n) if not seen[b])
        return _violation(
            "coverage", f"{(1 << n) - total} vertices uncovered", Vertex(missing, n)
        )
    return None


def check_gray(
    n: int,
    seq: Sequence[Vertex],
    cyclic: bool = False,
    start: Optional[Vertex] = None,
    end: Optional[Vertex] = None,
) -> Optional[Violation]:
    """
    Check that seq is a Gray code of Q_n.

    Args:
        n: Dimension
        seq: Candidate sequence
        cyclic: Also require the last and first vertices to be adjacent
        start: Required first vertex, if any
        end: Required last vertex, if any

    Returns:
        None when the sequence passes, else the first Violation
    """
    seen = bytearray(1 << n)
    for v in seq:
        if v.dim != n:
            return _violation("dimension", f"vertex of dimension {v.dim}", v)
    for u, w in zip(seq, seq[1:]):
        if (u.bits ^ w.bits).bit_count() != 1:
            return _violation("adjacency", "consecutive vertices not adjacent", u, w)
    for v in seq:
        if seen[v.bits]:
            return _violation("coverage", "vertex visited twice", v)
        seen[v.bits] = 1
    if len(seq) != 1 << n:
        missing = next(b for b in range(1 << n) if not seen[b])
        return _violation("coverage", f"{(1 << n) - len(seq)} vertices missing", Vertex(missing, n))
    if start is not None and seq[0] != start:
        return _violation("endpoint", "sequence does not start at the prescribed vertex", seq[0], start)
    if end is not None and seq[-1] != end:
        return _violation("endpoint", "sequence does not end at the prescribed vertex", seq[-1], end)
    if cyclic and (seq[0].bits ^ seq[-1].bits).bit_count() != 1:
        return _violation("cyclic", "last and first vertices not adjacent", seq[-1], seq[0])
    return None
