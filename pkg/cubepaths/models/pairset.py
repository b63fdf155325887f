"""Pair and Pair-Set Models"""

import random
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from cubepaths.models.hypercube import (
    CubePathsError,
    DimensionMismatchError,
    Vertex,
    iota,
    rho,
)


class InvalidPairSetError(CubePathsError):
    """Exception raised when pairs violate the pair-set invariants"""
    pass


class NotAnEdgeError(CubePathsError):
    """Exception raised when a merge is requested across a non-edge"""
    pass


class SharedPairError(CubePathsError):
    """Exception raised when both merge endpoints belong to the same pair"""
    pass


class PairKind(str, Enum):
    """Kind of a pair; EDGE pairs are odd"""
    ODD = "odd"
    EVEN = "even"
    DEGENERATE = "degenerate"
    EDGE = "edge"


@dataclass(frozen=True)
class Pair:
    """Unordered pair {a, b} of vertices, normalized so that a <= b"""

    a: Vertex
    b: Vertex

    def __post_init__(self):
        if self.a.dim != self.b.dim:
            raise DimensionMismatchError(
                f"Pair endpoints differ in dimension: {self.a.dim} vs {self.b.dim}"
            )
        if self.b.bits < self.a.bits:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    def __repr__(self) -> str:
        return f"<Pair({self.a}, {self.b})>"

    @property
    def dim(self) -> int:
        return self.a.dim

    @property
    def kind(self) -> PairKind:
        return classify(self)

    @property
    def is_degenerate(self) -> bool:
        return self.a == self.b

    @property
    def is_odd(self) -> bool:
        return self.a.parity != self.b.parity

    @property
    def is_even(self) -> bool:
        return self.a.parity == self.b.parity

    @property
    def is_edge(self) -> bool:
        return (self.a.bits ^ self.b.bits).bit_count() == 1

    @property
    def chi(self) -> int:
        """chi(a) + chi(b); 0 for odd pairs, +-2 for even ones"""
        return self.a.parity + self.b.parity

    @property
    def vertices(self) -> Tuple[Vertex, ...]:
        return (self.a,) if self.a == self.b else (self.a, self.b)

    def other(self, v: Vertex) -> Vertex:
        if v == self.a:
            return self.b
        if v == self.b:
            return self.a
        raise InvalidPairSetError(f"{v} is not an endpoint of {self!r}")

    def side(self, i: int) -> Optional[int]:
        """k if both endpoints have coordinate i equal to k, else None"""
        k = self.a.coord(i)
        return k if self.b.coord(i) == k else None


def classify(p: Pair) -> PairKind:
    if p.is_degenerate:
        return PairKind.DEGENERATE
    if p.is_edge:
        return PairKind.EDGE
    return PairKind.ODD if p.is_odd else PairKind.EVEN


@dataclass(frozen=True)
class PairSet:
    """
    A finite set of pairwise-disjoint pairs in Q_dim.

    Pairs are kept sorted by their smaller endpoint, so two pair-sets are
    equal exactly when they contain the same pairs. The constructor checks
    dimensions and disjointness only; projections may legitimately yield
    collections made of degenerate pairs, which ``is_pairset`` reports.
    Use ``PairSet.of`` when the full invariant is required.
    """

    dim: int
    pairs: Tuple[Pair, ...] = field(default=())

    def __post_init__(self):
        pairs = tuple(sorted(self.pairs, key=lambda p: (p.a.bits, p.b.bits)))
        seen: Set[int] = set()
        for p in pairs:
            if p.dim != self.dim:
                raise DimensionMismatchError(
                    f"Pair {p!r} has dimension {p.dim}, expected {self.dim}"
                )
            for v in p.vertices:
                if v.bits in seen:
                    raise InvalidPairSetError(f"Vertex {v} occurs in two pairs")
                seen.add(v.bits)
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def of(cls, dim: int, pairs: Iterable[Pair]) -> "PairSet":
        """
        Build a pair-set and enforce every invariant.

        Raises:
            InvalidPairSetError: If pairs overlap or all pairs are degenerate
        """
        result = cls(dim, tuple(pairs))
        if not result.is_pairset:
            raise InvalidPairSetError("A nonempty pair-set needs a non-degenerate pair")
        return result

    @classmethod
    def from_strings(cls, pairs: Iterable[Sequence[str]], dim: Optional[int] = None) -> "PairSet":
        parsed = [
            Pair(Vertex.parse(a, dim), Vertex.parse(b, dim)) for a, b in pairs
        ]
        if dim is None:
            if not parsed:
                raise InvalidPairSetError("Cannot infer the dimension of an empty pair-set")
            dim = parsed[0].dim
        return cls.of(dim, parsed)

    def __repr__(self) -> str:
        body = ", ".join(f"{{{p.a},{p.b}}}" for p in self.pairs)
        return f"<PairSet(n={self.dim}, [{body}])>"

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @cached_property
    def union_bits(self) -> FrozenSet[int]:
        return frozenset(v.bits for p in self.pairs for v in p.vertices)

    @cached_property
    def union(self) -> FrozenSet[Vertex]:
        return frozenset(v for p in self.pairs for v in p.vertices)

    @cached_property
    def owner(self) -> Dict[int, int]:
        """Map from endpoint bits to the index of its pair"""
        return {v.bits: idx for idx, p in enumerate(self.pairs) for v in p.vertices}

    @property
    def is_pairset(self) -> bool:
        return not self.pairs or any(not p.is_degenerate for p in self.pairs)

    @property
    def norm(self) -> int:
        """Number of odd pairs, written ||A||"""
        return sum(1 for p in self.pairs if p.is_odd)

    @property
    def is_odd(self) -> bool:
        return all(p.is_odd for p in self.pairs)

    @property
    def is_pure(self) -> bool:
        return all(not p.is_degenerate for p in self.pairs)

    @property
    def is_balanced(self) -> bool:
        return chi_set(self) == 0

    @property
    def edge_count(self) -> int:
        return sum(1 for p in self.pairs if p.is_edge)

    def with_pairs(self, removed: Iterable[Pair] = (), added: Iterable[Pair] = ()) -> "PairSet":
        drop = set(removed)
        kept = [p for p in self.pairs if p not in drop]
        return PairSet(self.dim, tuple(kept) + tuple(added))


@dataclass(frozen=True)
class Matching:
    """
    An (A, i)-matching: couples of indices into ``A.pairs`` pairing every
    even pair with one of opposite parity sum.
    """

    coordinate: int
    couples: Tuple[Tuple[int, int], ...] = ()

    def __len__(self) -> int:
        return len(self.couples)


def chi_set(A: PairSet) -> int:
    return sum(p.chi for p in A.pairs)


def sigma(A: PairSet, i: int) -> Tuple[int, int]:
    """(n0, n1): numbers of pairs lying entirely in the half-cubes {alpha(i)=0}, {alpha(i)=1}"""
    counts = [0, 0]
    for p in A.pairs:
        k = p.side(i)
        if k is not None:
            counts[k] += 1
    return counts[0], counts[1]


def split_pairs(A: PairSet, i: int) -> List[Pair]:
    return [p for p in A.pairs if p.side(i) is None]


def rho_set(A: PairSet, i: int, k: int) -> PairSet:
    """
    Project the pairs lying in {alpha(i)=k} into Q_{n-1}.

    The result may consist only of degenerate pairs; check ``is_pairset``.
    """
    projected = [
        Pair(rho(i, k, p.a), rho(i, k, p.b)) for p in A.pairs if p.side(i) == k
    ]
    return PairSet(A.dim - 1, tuple(projected))


def iota_set(A0: PairSet, A1: PairSet, i: int, k: int) -> PairSet:
    """Inject A0 into {alpha(i)=k} and A1 into {alpha(i)=1-k}"""
    if A0.dim != A1.dim:
        raise DimensionMismatchError(f"Half pair-sets differ in dimension: {A0.dim} vs {A1.dim}")
    lifted = [Pair(iota(i, k, p.a), iota(i, k, p.b)) for p in A0.pairs]
    lifted += [Pair(iota(i, 1 - k, p.a), iota(i, 1 - k, p.b)) for p in A1.pairs]
    return PairSet(A0.dim + 1, tuple(lifted))


def enco_bits(xbits: Iterable[int], dim: int) -> Set[int]:
    """Masks of the vertices all of whose neighbours lie in the given mask set"""
    xset = set(xbits)
    candidates: Set[int] = set()
    for x in xset:
        for j in range(dim):
            candidates.add(x ^ (1 << j))
    return {
        c for c in candidates
        if all(c ^ (1 << j) in xset for j in range(dim))
    }


def encompassed(X: Iterable[Vertex], dim: int) -> Set[Vertex]:
    """enco(X): vertices encompassed by the vertex set X"""
    return {Vertex(b, dim) for b in enco_bits((v.bits for v in X), dim)}


def enco(A: PairSet) -> Set[Vertex]:
    return encompassed(A.union, A.dim)


def enc(A: PairSet) -> Set[Vertex]:
    """Encompassed vertices that are not endpoints of A"""
    return {v for v in enco(A) if v.bits not in A.union_bits}


def imply_step(
    A: PairSet, p1: int, p2: int, endpoints: Tuple[Vertex, Vertex]
) -> Tuple[PairSet, Tuple[Vertex, Vertex]]:
    """
    Merge pairs p1 = {alpha, beta} and p2 = {alpha', beta'} across the edge
    (beta, beta') into {alpha, alpha'}.

    Returns:
        The merged pair-set and the edge used, for later path splicing

    Raises:
        SharedPairError: If p1 == p2
        NotAnEdgeError: If beta, beta' are not adjacent
        InvalidPairSetError: If an endpoint is not in its pair
    """
    if p1 == p2:
        raise SharedPairError(f"Cannot merge pair {p1} with itself")
    beta, beta_ = endpoints
    if beta.hamming(beta_) != 1:
        raise NotAnEdgeError(f"{beta} and {beta_} are not adjacent")
    first, second = A.pairs[p1], A.pairs[p2]
    merged = Pair(first.other(beta), second.other(beta_))
    return A.with_pairs(removed=(first, second), added=(merged,)), (beta, beta_)


def merge_at(A: PairSet, u: Vertex, v: Vertex) -> PairSet:
    """Apply one merge step identified by its edge endpoints"""
    try:
        p1, p2 = A.owner[u.bits], A.owner[v.bits]
    except KeyError as e:
        raise InvalidPairSetError(f"Merge endpoint {e} is not in the pair-set")
    return imply_step(A, p1, p2, (u, v))[0]


def _free_vertex(rng: random.Random, dim: int, used: Set[int], parity: Optional[int] = None) -> int:
    """Draw a random unused mask of the given parity; -1 when none exists"""
    choices = [
        b for b in range(1 << dim)
        if b not in used and (parity is None or (-1 if b.bit_count() & 1 else 1) == parity)
    ]
    return rng.choice(choices) if choices else -1


def refine_with_edge_pairs(
    A: PairSet, m: int, rng: random.Random
) -> Tuple[PairSet, List[Tuple[Vertex, Vertex]]]:
    """
    Thread one non-degenerate pair of A through m - |A| fresh edge pairs.

    Returns A' with |A'| = m together with the merge script that takes A'
    back to A, so connectors of A' splice into connectors of A.

    Raises:
        InvalidPairSetError: If A has no non-degenerate pair or Q_n runs
            out of disjoint free edges
    """
    extra = m - len(A)
    if extra <= 0:
        return A, []
    targets = [p for p in A.pairs if not p.is_degenerate]
    if not targets:
        raise InvalidPairSetError("No non-degenerate pair to refine")
    base = rng.choice(targets)
    alpha, beta = base.a, base.b
    used = set(A.union_bits)
    chain: List[Tuple[int, int]] = []
    for _ in range(extra):
        start = next_bits = -1
        for _attempt in range(64):
            start = _free_vertex(rng, A.dim, used, -alpha.parity)
            if start < 0:
                break
            free_nbrs = [start ^ (1 << j) for j in range(A.dim) if start ^ (1 << j) not in used]
            if free_nbrs:
                next_bits = rng.choice(free_nbrs)
                break
        if start < 0 or next_bits < 0:
            raise InvalidPairSetError(f"Not enough free edges in Q_{A.dim} to refine to size {m}")
        used.update((start, next_bits))
        chain.append((start, next_bits))

    dim = A.dim
    new_pairs = [Pair(alpha, Vertex(chain[0][0], dim))]
    for (_, end), (start, _) in zip(chain, chain[1:]):
        new_pairs.append(Pair(Vertex(end, dim), Vertex(start, dim)))
    new_pairs.append(Pair(Vertex(chain[-1][1], dim), beta))
    merges = [(Vertex(s, dim), Vertex(e, dim)) for s, e in chain]
    return A.with_pairs(removed=(base,), added=new_pairs), merges


def random_odd_pairset(dim: int, size: int, rng: random.Random) -> PairSet:
    """A random odd pair-set of the given size"""
    if 2 * size > 1 << dim:
        raise InvalidPairSetError(f"Q_{dim} cannot hold {size} disjoint pairs")
    used: Set[int] = set()
    pairs = []
    for _ in range(size):
        a = _free_vertex(rng, dim, used)
        used.add(a)
        b = _free_vertex(rng, dim, used, 1 if a.bit_count() & 1 else -1)
        used.add(b)
        pairs.append(Pair(Vertex(a, dim), Vertex(b, dim)))
    return PairSet.of(dim, pairs)


def random_balanced_pairset(
    dim: int, size: int, rng: random.Random, degenerate: bool = True
) -> PairSet:
    """
    A random balanced pair-set mixing odd pairs with couples of even pairs
    of opposite parity; degenerate pairs appear when allowed.
    """
    if 2 * size > 1 << dim:
        raise InvalidPairSetError(f"Q_{dim} cannot hold {size} disjoint pairs")
    while True:
        couples = rng.randint(0, size // 2)
        used: Set[int] = set()
        pairs = []
        for _ in range(size - 2 * couples):
            a = _free_vertex(rng, dim, used)
            used.add(a)
            b = _free_vertex(rng, dim, used, 1 if a.bit_count() & 1 else -1)
            used.add(b)
            pairs.append(Pair(Vertex(a, dim), Vertex(b, dim)))
        ok = True
        for _ in range(couples):
            for sign in (1, -1):
                a = _free_vertex(rng, dim, used, sign)
                if a < 0:
                    ok = False
                    break
                used.add(a)
                if degenerate and rng.random() < 0.3:
                    b = a
                else:
                    b = _free_vertex(rng, dim, used, sign)
                    if b < 0:
                        ok = False
                        break
                    used.add(b)
                pairs.append(Pair(Vertex(a, dim), Vertex(b, dim)))
            if not ok:
                break
        if ok and any(not p.is_degenerate for p in pairs):
            return PairSet.of(dim, pairs)
