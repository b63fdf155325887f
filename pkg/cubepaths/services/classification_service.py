"""Pair-Set Classification Service

Diminishability, separating and bad coordinates, (A, i)-matchings and
canonical forms under the automorphism group of Q_n.
"""

import itertools
import logging
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import FrozenSet, List, NamedTuple, Optional, Tuple

import networkx as nx
from networkx.algorithms import bipartite

from cubepaths.models.hypercube import CubePathsError, Vertex
from cubepaths.models.pairset import Matching, Pair, PairSet, enc, sigma

logger = logging.getLogger(__name__)

CANONICAL_MAX_DIMENSION = 6

CanonicalKey = Tuple[Tuple[int, int], ...]


class NotOddError(CubePathsError):
    """Exception raised when an odd pair-set is required"""
    pass


class SizeMismatchError(CubePathsError):
    """Exception raised when |A| != n for an operation defined only there"""
    pass


class DimensionTooLargeError(CubePathsError):
    """Exception raised when an exhaustive operation is asked for too large an n"""
    pass


class UnbalancedError(CubePathsError):
    """Exception raised when a balanced pair-set is required"""
    pass


class ConstraintInfeasibleAtIError(CubePathsError):
    """Exception raised when no (A, i)-matching respects the degenerate-pair clause"""
    pass


class SamplingExhaustedError(CubePathsError):
    """Exception raised when random draws find no pair-set with the requested shape"""
    pass


class DiminishableVerdict(NamedTuple):
    ok: bool
    reason: str


def _hypercube_graph(dim: int) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(1 << dim))
    G.add_edges_from(
        (v, v ^ (1 << j)) for v in range(1 << dim) for j in range(dim) if v < v ^ (1 << j)
    )
    return G


@lru_cache(maxsize=None)
def facet_family(dim: int) -> Tuple[FrozenSet[int], ...]:
    """The 2*dim facets {alpha(i) = k} of Q_dim as vertex mask sets"""
    return tuple(
        frozenset(v for v in range(1 << dim) if (v >> i) & 1 == k)
        for i in range(dim) for k in (0, 1)
    )


@lru_cache(maxsize=None)
def induced_subcube_family(dim: int) -> Tuple[FrozenSet[int], ...]:
    """
    All vertex sets of Q_dim inducing a copy of Q_{dim-1}, found by
    exhaustive isomorphism testing.
    """
    G = _hypercube_graph(dim)
    target = _hypercube_graph(dim - 1)
    size = 1 << (dim - 1)
    found = []
    for subset in itertools.combinations(range(1 << dim), size):
        H = G.subgraph(subset)
        if H.number_of_edges() != target.number_of_edges():
            continue
        if any(d != dim - 1 for _, d in H.degree()):
            continue
        if nx.is_isomorphic(H, target):
            found.append(frozenset(subset))
    if set(found) != set(facet_family(dim)):
        logger.warning(
            f"Induced Q_{dim - 1} family of Q_{dim} has {len(found)} members beyond facets"
        )
    return tuple(found)


def is_diminishable(A: PairSet) -> DiminishableVerdict:
    """
    Decide whether an odd pair-set is diminishable.

    Raises:
        NotOddError: If A contains an even pair
    """
    if not A.is_odd:
        raise NotOddError("Diminishability is defined for odd pair-sets only")
    n, size = A.dim, len(A)
    if size == 0:
        return DiminishableVerdict(False, "empty pair-set")
    if size <= n - 1:
        if n != 4:
            return DiminishableVerdict(True, "size at most n-1")
        if A.edge_count:
            return DiminishableVerdict(True, "n=4, size at most 3 with an edge pair")
        union = A.union_bits
        if any(union <= cube for cube in induced_subcube_family(4)):
            return DiminishableVerdict(False, "n=4, no edge pair and endpoints inside a sub-Q3")
        return DiminishableVerdict(True, "n=4, endpoints span every sub-Q3")
    if size == n:
        if n == 4:
            return DiminishableVerdict(False, "size n with n=4")
        if A.edge_count < 2:
            return DiminishableVerdict(False, "size n with fewer than two edge pairs")
        if enc(A):
            return DiminishableVerdict(False, "size n with an encompassed vertex")
        return DiminishableVerdict(True, "size n, two edge pairs, no encompassed vertex")
    return DiminishableVerdict(False, "size exceeds n")


def separating(A: PairSet, i: int) -> bool:
    """
    Coordinate i is separating if edge pairs lie on both sides of it.

    Raises:
        SizeMismatchError: If |A| != n
    """
    if len(A) != A.dim:
        raise SizeMismatchError(f"separating needs |A| = n, got |A|={len(A)}, n={A.dim}")
    sides = {p.side(i) for p in A.pairs if p.is_edge}
    return 0 in sides and 1 in sides


def bad(A: PairSet, i: int) -> bool:
    """
    Coordinate i is bad when it is separating with sigma_i = (n-3, 1) up to
    swapping sides, and the two split pairs crowd the k-side neighbourhood
    of their k-endpoints as the saturation clause describes.

    Raises:
        SizeMismatchError: If |A| != n
    """
    n = A.dim
    if not separating(A, i):
        return False
    counts = sigma(A, i)
    union_bits = A.union_bits
    for k in (0, 1):
        if counts[k] != n - 3 or counts[1 - k] != 1:
            continue
        for p0, p1, p2 in itertools.permutations(range(len(A)), 3):
            P0, P1, P2 = A.pairs[p0], A.pairs[p1], A.pairs[p2]
            if P2.side(i) != 1 - k:
                continue
            for a0, a1 in itertools.product(P0.vertices, P1.vertices):
                if a0.coord(i) != k or a1.coord(i) != k:
                    continue
                b0, b1 = P0.other(a0), P1.other(a1)
                if b0.coord(i) != 1 - k or b1.coord(i) != 1 - k:
                    continue
                if a0.parity == a1.parity:
                    continue
                rest = union_bits - {v.bits for v in (*P0.vertices, *P1.vertices, *P2.vertices)}
                across = {P2.a.bits, P2.b.bits, b0.bits, b1.bits}
                if _saturated(a0, a1, i, k, rest, across):
                    return True
    return False


def _saturated(a0: Vertex, a1: Vertex, i: int, k: int, rest, across) -> bool:
    for aj, other in ((a0, a1), (a1, a0)):
        for j in range(aj.dim):
            kappa = aj.bits ^ (1 << j)
            if (kappa >> i) & 1 != k:
                continue
            if kappa in rest or kappa == other.bits or kappa ^ (1 << i) in across:
                continue
            return False
    return True


@lru_cache(maxsize=None)
def _permutation_tables(dim: int) -> Tuple[Tuple[int, ...], ...]:
    """Coordinate permutations of Q_dim as lookup tables on masks"""
    tables = []
    for perm in itertools.permutations(range(dim)):
        table = []
        for v in range(1 << dim):
            image = 0
            for j, src in enumerate(perm):
                if (v >> src) & 1:
                    image |= 1 << j
            table.append(image)
        tables.append(tuple(table))
    return tuple(tables)


def _images(A: PairSet):
    """Yield the sorted pair-key of every automorphic image of A"""
    n = A.dim
    if n > CANONICAL_MAX_DIMENSION:
        raise DimensionTooLargeError(
            f"Canonical forms are limited to n <= {CANONICAL_MAX_DIMENSION}, got {n}"
        )
    raw = [(p.a.bits, p.b.bits) for p in A.pairs]
    for table in _permutation_tables(n):
        mapped = [(table[a], table[b]) for a, b in raw]
        for t in range(1 << n):
            yield tuple(sorted(
                (x ^ t, y ^ t) if x ^ t <= y ^ t else (y ^ t, x ^ t) for x, y in mapped
            ))


def canonical_key(A: PairSet) -> CanonicalKey:
    """Lexicographically least image of A over all automorphisms of Q_n"""
    return min(_images(A))


def canonical_key_and_orbit(A: PairSet) -> Tuple[CanonicalKey, int]:
    """Canonical key together with the number of distinct labelled images"""
    images = set(_images(A))
    return min(images), len(images)


def pairset_from_key(dim: int, key: CanonicalKey) -> PairSet:
    return PairSet(dim, tuple(Pair(Vertex(a, dim), Vertex(b, dim)) for a, b in key))


def canonical_form(A: PairSet) -> PairSet:
    """
    Canonical representative of A's isomorphism class; two pair-sets are
    isomorphic exactly when their canonical forms are equal.

    Raises:
        DimensionTooLargeError: If n > 6
    """
    return pairset_from_key(A.dim, canonical_key(A))


def build_matching(A: PairSet, i: int, rng: Optional[random.Random] = None) -> Matching:
    """
    Pair every even pair of A with one of opposite parity sum; two
    degenerate pairs may be coupled only if they agree at coordinate i.

    Raises:
        UnbalancedError: If A is not balanced
        ConstraintInfeasibleAtIError: If the degenerate clause blocks every
            perfect matching at this coordinate
    """
    if not A.is_balanced:
        raise UnbalancedError(f"chi(A) = {sum(p.chi for p in A.pairs)}, not 0")
    plus = [idx for idx, p in enumerate(A.pairs) if p.chi > 0]
    minus = [idx for idx, p in enumerate(A.pairs) if p.chi < 0]
    if not plus:
        return Matching(i, ())
    if rng is not None:
        rng.shuffle(plus)
        rng.shuffle(minus)

    G = nx.Graph()
    top = [("p", idx) for idx in plus]
    G.add_nodes_from(top, bipartite=0)
    G.add_nodes_from((("m", idx) for idx in minus), bipartite=1)
    for p_idx in plus:
        P = A.pairs[p_idx]
        for m_idx in minus:
            M = A.pairs[m_idx]
            if P.is_degenerate and M.is_degenerate and P.a.coord(i) != M.a.coord(i):
                continue
            G.add_edge(("p", p_idx), ("m", m_idx))

    matched = bipartite.hopcroft_karp_matching(G, top_nodes=top)
    couples = tuple(sorted(
        (node[1], matched[node][1]) for node in top if node in matched
    ))
    if len(couples) != len(plus):
        raise ConstraintInfeasibleAtIError(
            f"No (A,{i})-matching: degenerate pairs cannot be coupled at coordinate {i}"
        )
    return Matching(i, couples)


def validate_matching(A: PairSet, R: Matching) -> bool:
    """True when R is an (A, i)-matching for its coordinate"""
    i = R.coordinate
    used = [idx for couple in R.couples for idx in couple]
    evens = {idx for idx, p in enumerate(A.pairs) if p.is_even}
    if len(used) != len(set(used)) or set(used) != evens:
        return False
    for x, y in R.couples:
        P, Q = A.pairs[x], A.pairs[y]
        if P.chi + Q.chi != 0:
            return False
        if P.is_degenerate and Q.is_degenerate and P.a.coord(i) != Q.a.coord(i):
            return False
    return True


def random_diminishable_pairset(
    dim: int, size: int, rng: random.Random, max_tries: int = 10000
) -> PairSet:
    """
    A random diminishable pair-set; for size n, two edge pairs are planted
    first since random odd pairs rarely supply them.

    Raises:
        SamplingExhaustedError: If no sample is found within max_tries draws
    """
    planted = 2 if size == dim else 0
    for _ in range(max_tries):
        used = set()
        pairs = []
        for _ in range(planted):
            free = [b for b in range(1 << dim) if b not in used]
            a = rng.choice(free)
            nbrs = [a ^ (1 << j) for j in range(dim) if a ^ (1 << j) not in used]
            if not nbrs:
                break
            b = rng.choice(nbrs)
            used.update((a, b))
            pairs.append(Pair(Vertex(a, dim), Vertex(b, dim)))
        for _ in range(size - len(pairs)):
            a = rng.choice([b for b in range(1 << dim) if b not in used])
            used.add(a)
            want = a.bit_count() & 1 ^ 1
            b = rng.choice([c for c in range(1 << dim) if c not in used and c.bit_count() & 1 == want])
            used.add(b)
            pairs.append(Pair(Vertex(a, dim), Vertex(b, dim)))
        A = PairSet(dim, tuple(pairs))
        if len(A) == size and is_diminishable(A).ok:
            return A
    raise SamplingExhaustedError(f"No diminishable pair-set of size {size} in Q_{dim} after {max_tries} draws")


@dataclass
class PairSetProfile:
    """Everything the classify command reports about a pair-set"""

    n: int
    size: int
    norm: int
    odd: bool
    balanced: bool
    pure: bool
    sigma: List[Tuple[int, int]]
    enc: List[str]
    diminishable: Optional[bool] = None
    diminishable_reason: str = ""
    separating: List[int] = field(default_factory=list)
    bad: List[int] = field(default_factory=list)


def profile(A: PairSet) -> PairSetProfile:
    result = PairSetProfile(
        n=A.dim,
        size=len(A),
        norm=A.norm,
        odd=A.is_odd,
        balanced=A.is_balanced,
        pure=A.is_pure,
        sigma=[sigma(A, i) for i in range(A.dim)],
        enc=sorted(str(v) for v in enc(A)),
    )
    if A.is_odd:
        verdict = is_diminishable(A)
        result.diminishable = verdict.ok
        result.diminishable_reason = verdict.reason
    if len(A) == A.dim:
        result.separating = [i for i in range(A.dim) if separating(A, i)]
        result.bad = [i for i in range(A.dim) if bad(A, i)]
    return result
