"""Connector Model"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

from cubepaths.models.hypercube import Vertex, iota_bits
from cubepaths.models.pairset import (
    InvalidPairSetError,
    NotAnEdgeError,
    PairSet,
    SharedPairError,
)


@dataclass(frozen=True)
class Connector:
    """
    One vertex path per pair of a pair-set, in the pair-set's order.

    Paths run from ``pair.a`` to ``pair.b``; a degenerate pair has the
    singleton path. Validity is the verifier's business, not this class's.
    """

    dim: int
    paths: Tuple[Tuple[Vertex, ...], ...]

    @classmethod
    def from_bits(cls, dim: int, paths: Iterable[Sequence[int]]) -> "Connector":
        return cls(dim, tuple(tuple(Vertex(b, dim) for b in path) for path in paths))

    def bit_paths(self) -> List[List[int]]:
        return [[v.bits for v in path] for path in self.paths]

    def __repr__(self) -> str:
        lengths = ",".join(str(len(p)) for p in self.paths)
        return f"<Connector(n={self.dim}, lengths=[{lengths}])>"

    @property
    def vertex_count(self) -> int:
        return sum(len(p) for p in self.paths)


def orient_paths(A: PairSet, paths: Iterable[Sequence[int]]) -> Connector:
    """
    Match free-standing paths (as masks) to the pairs of A by endpoints and
    orient each from ``pair.a`` to ``pair.b``.

    Raises:
        KeyError: If some pair of A has no path with its endpoints
    """
    by_ends = {}
    for path in paths:
        key = (min(path[0], path[-1]), max(path[0], path[-1]))
        by_ends[key] = list(path)
    ordered = []
    for p in A.pairs:
        path = by_ends[(p.a.bits, p.b.bits)]
        if path[0] != p.a.bits:
            path = path[::-1]
        ordered.append(path)
    return Connector.from_bits(A.dim, ordered)


def lift_paths(paths: Iterable[Sequence[int]], i: int, k: int) -> List[List[int]]:
    """Inject mask paths of Q_{n-1} into the half-cube {alpha(i)=k} of Q_n"""
    return [[iota_bits(i, k, b) for b in path] for path in paths]


def splice_paths(
    paths: Iterable[Sequence[int]], merges: Iterable[Tuple[int, int]]
) -> List[List[int]]:
    """
    Join paths across edges, in order. For a merge (u, v) the path ending
    at u is followed by the path starting at v; both are reversed as
    needed and singleton paths take either role.

    Raises:
        SharedPairError: If u and v are the two ends of one path
        NotAnEdgeError: If u and v are not adjacent
        InvalidPairSetError: If u or v is not a path end
    """
    pool: Dict[int, List[int]] = {}
    ends: Dict[int, int] = {}
    for idx, path in enumerate(paths):
        pool[idx] = list(path)
        ends[path[0]] = idx
        ends[path[-1]] = idx
    next_id = len(pool)
    for u, v in merges:
        if (u ^ v).bit_count() != 1:
            raise NotAnEdgeError(f"Cannot splice across non-edge ({u}, {v})")
        if u not in ends or v not in ends:
            raise InvalidPairSetError(f"Splice endpoint missing: ({u}, {v})")
        pu, pv = ends[u], ends[v]
        if pu == pv:
            raise SharedPairError(f"Splice ({u}, {v}) would close a cycle")
        first, second = pool.pop(pu), pool.pop(pv)
        if first[-1] != u:
            first.reverse()
        if second[0] != v:
            second.reverse()
        for x in (first[0], first[-1], second[0], second[-1]):
            ends.pop(x, None)
        joined = first + second
        pool[next_id] = joined
        ends[joined[0]] = next_id
        ends[joined[-1]] = next_id
        next_id += 1
    return list(pool.values())
