"""Census Service

Isomorphism-reduced enumeration of small pair-sets with a connectability
verdict for every class. Classes are grown one pair at a time from the
representatives of the previous size and deduplicated by canonical key.
"""

import itertools
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

from cubepaths.models.connector import Connector
from cubepaths.models.hypercube import Vertex
from cubepaths.models.pairset import Pair, PairSet, enc
from cubepaths.services.classification_service import (
    CanonicalKey,
    DimensionTooLargeError,
    canonical_key,
    canonical_key_and_orbit,
    pairset_from_key,
    random_diminishable_pairset,
)
from cubepaths.services.search_service import search_connector
from cubepaths.storage.backend import RecordSink

logger = logging.getLogger(__name__)

CENSUS_MAX_DIMENSION = 4
TWO_EDGE_OBSTRUCTIONS = 53


@dataclass(frozen=True)
class CensusSlice:
    """A named family of pair-sets to enumerate"""

    name: str
    dim: int
    sizes: Tuple[int, ...]
    odd: bool
    keep: Callable[[PairSet], bool] = lambda A: True


def _edge_count_is(k: int) -> Callable[[PairSet], bool]:
    return lambda A: A.edge_count == k and not enc(A)


SLICES: Dict[str, CensusSlice] = {
    s.name: s for s in (
        CensusSlice("q3-balanced-2", 3, (2,), odd=False),
        CensusSlice("q4-odd-le3", 4, (1, 2, 3), odd=True),
        CensusSlice("q4-two-edges", 4, (4,), odd=True, keep=_edge_count_is(2)),
        CensusSlice(
            "q4-three-edges", 4, (4,), odd=True,
            keep=lambda A: A.edge_count >= 3 and not enc(A),
        ),
    )
}


@dataclass
class CensusEntry:
    canonical: PairSet
    orbit_size: int
    connectable: bool
    connector: Optional[Connector] = None
    token: Optional[str] = None


@dataclass
class CensusSummary:
    """Totals under both counting conventions"""

    n: int
    predicate: str
    classes: int
    raw: int
    non_connectable_classes: int
    non_connectable_raw: int

    @property
    def matches_53(self) -> Optional[str]:
        """Which convention, if any, reports 53 non-connectable sets"""
        if self.non_connectable_classes == TWO_EDGE_OBSTRUCTIONS:
            return "classes"
        if self.non_connectable_raw == TWO_EDGE_OBSTRUCTIONS:
            return "raw"
        return None


def _odd_pairs(dim: int) -> List[Pair]:
    return [
        Pair(Vertex(a, dim), Vertex(b, dim))
        for a in range(1 << dim) for b in range(a + 1, 1 << dim)
        if (a ^ b).bit_count() & 1
    ]


def _all_pairs(dim: int) -> List[Pair]:
    return [
        Pair(Vertex(a, dim), Vertex(b, dim))
        for a in range(1 << dim) for b in range(a, 1 << dim)
    ]


def _grow(dim: int, reps: Iterable[PairSet], pool: List[Pair]) -> List[PairSet]:
    """Class representatives of size k+1 reachable by adding one pool pair"""
    seen: Dict[CanonicalKey, PairSet] = {}
    for rep in reps:
        used = rep.union_bits
        for p in pool:
            if p.a.bits in used or p.b.bits in used:
                continue
            key = canonical_key(PairSet(dim, rep.pairs + (p,)))
            if key not in seen:
                seen[key] = pairset_from_key(dim, key)
    return [seen[k] for k in sorted(seen)]


def _balanced_pairs_of_two(dim: int) -> List[PairSet]:
    seen: Dict[CanonicalKey, PairSet] = {}
    for p, q in itertools.combinations(_all_pairs(dim), 2):
        if p.is_degenerate and q.is_degenerate:
            continue
        if set(p.vertices) & set(q.vertices) or p.chi + q.chi != 0:
            continue
        key = canonical_key(PairSet(dim, (p, q)))
        if key not in seen:
            seen[key] = pairset_from_key(dim, key)
    return [seen[k] for k in sorted(seen)]


def candidate_classes(slice_: CensusSlice) -> List[PairSet]:
    """One representative per isomorphism class of the slice"""
    dim = slice_.dim
    if not slice_.odd:
        if slice_.sizes != (2,):
            raise DimensionTooLargeError("Balanced census is implemented for size 2 only")
        return [A for A in _balanced_pairs_of_two(dim) if slice_.keep(A)]
    pool = _odd_pairs(dim)
    reps = [PairSet(dim, ())]
    found: List[PairSet] = []
    for size in range(1, max(slice_.sizes) + 1):
        reps = _grow(dim, reps, pool)
        logger.info(f"{slice_.name}: {len(reps)} classes of size {size}")
        if size in slice_.sizes:
            found.extend(A for A in reps if slice_.keep(A))
    return found


def _verdict(A: PairSet) -> CensusEntry:
    _, orbit = canonical_key_and_orbit(A)
    result = search_connector(A, exhaustive=True)
    return CensusEntry(
        canonical=A,
        orbit_size=orbit,
        connectable=result.found,
        connector=result.connector,
        token=result.token,
    )


def _record(slice_: CensusSlice, entry: CensusEntry) -> Dict:
    return {
        "schema_version": 1,
        "kind": "census",
        "n": slice_.dim,
        "predicate": slice_.name,
        "canonical": [[str(p.a), str(p.b)] for p in entry.canonical.pairs],
        "verdict": "connectable" if entry.connectable else "non-connectable",
        "certificate": entry.token if entry.token else "connector",
        "orbit_size": entry.orbit_size,
    }


def enumerate_classes(
    n: int,
    predicate: str,
    threads: int = 1,
    sink: Optional[RecordSink] = None,
) -> List[CensusEntry]:
    """
    Enumerate the classes of a named slice and decide each by search.

    Args:
        n: Dimension; must match the slice
        predicate: Slice name, one of ``SLICES``
        threads: Worker threads deciding classes
        sink: Receives one record per class, in canonical order

    Raises:
        DimensionTooLargeError: If n > 4
        KeyError: If the predicate is unknown or not defined at n
    """
    if n > CENSUS_MAX_DIMENSION:
        raise DimensionTooLargeError(f"Full census is limited to n <= {CENSUS_MAX_DIMENSION}, got {n}")
    slice_ = SLICES[predicate]
    if slice_.dim != n:
        raise KeyError(f"Slice {predicate} is defined for n={slice_.dim}, not n={n}")

    classes = candidate_classes(slice_)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(_verdict, classes))
    else:
        entries = [_verdict(A) for A in classes]

    if sink is not None:
        for entry in entries:
            sink.append(_record(slice_, entry))
    logger.info(
        f"{predicate}: {len(entries)} classes, "
        f"{sum(1 for e in entries if not e.connectable)} non-connectable"
    )
    return entries


def summarize(n: int, predicate: str, entries: List[CensusEntry]) -> CensusSummary:
    bad = [e for e in entries if not e.connectable]
    return CensusSummary(
        n=n,
        predicate=predicate,
        classes=len(entries),
        raw=sum(e.orbit_size for e in entries),
        non_connectable_classes=len(bad),
        non_connectable_raw=sum(e.orbit_size for e in bad),
    )


@lru_cache(maxsize=None)
def known_obstructions() -> FrozenSet[CanonicalKey]:
    """Canonical keys of the non-connectable odd pair-sets of Q_4 with at most three pairs"""
    entries = enumerate_classes(4, "q4-odd-le3")
    return frozenset(canonical_key(e.canonical) for e in entries if not e.connectable)


def sample_diminishable(n: int, samples: int, seed: int) -> List[CensusEntry]:
    """
    Decide random diminishable pair-sets of every admissible size in
    Q_n (n <= 5) by exhaustive search.
    """
    if n > 5:
        raise DimensionTooLargeError(f"Sampled census is limited to n <= 5, got {n}")
    rng = random.Random(seed)
    entries = []
    for _ in range(samples):
        size = rng.randint(1, n - 1 if n == 4 else n)
        A = random_diminishable_pairset(n, size, rng)
        result = search_connector(A, exhaustive=True)
        entries.append(CensusEntry(A, 1, result.found, result.connector, result.token))
    return entries
