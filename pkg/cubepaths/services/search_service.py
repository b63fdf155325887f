"""Connector Search Service

Pruned backtracking search for connectors in small dimensions, and a
naive router kept as an independent oracle for the exhaustive verdicts.
"""

import hashlib
import logging
import random
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

from cubepaths.models.connector import Connector
from cubepaths.models.hypercube import CubePathsError
from cubepaths.models.pairset import PairSet
from cubepaths.services.classification_service import DimensionTooLargeError

logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX_DIMENSION = 5
FINISH = -1


class BudgetExceededError(CubePathsError):
    """Exception raised when a search runs out of nodes"""

    def __init__(self, nodes: int, message: str):
        super().__init__(message)
        self.nodes = nodes


class SearchOutcome(str, Enum):
    FOUND = "found"
    EXHAUSTED = "exhausted"


@dataclass
class SearchResult:
    """Outcome of one search; EXHAUSTED carries an exhaustion token"""

    outcome: SearchOutcome
    nodes: int
    connector: Optional[Connector] = None
    token: Optional[str] = None

    @property
    def found(self) -> bool:
        return self.outcome == SearchOutcome.FOUND


def exhaustion_token(A: PairSet, nodes: int) -> str:
    """Hash of the searched instance joined with the node count"""
    digest = hashlib.sha256(repr(A).encode("utf-8")).hexdigest()[:16]
    return f"{digest}:{nodes}"


def _balance_term(f: int, b: int) -> int:
    """Odd-minus-even count of the interior of any f..b path"""
    pf, pb = f.bit_count() & 1, b.bit_count() & 1
    if pf != pb:
        return 0
    return 1 if pf == 0 else -1


class SearchState:
    """
    Occupancy and partial paths of one search.

    Every endpoint of A is occupied from the start; path p grows from
    ``pair.a`` and is finished by stepping onto ``pair.b``. ``balance`` is
    the number of free odd vertices minus the number of free even ones.
    """

    def __init__(self, A: PairSet):
        n = A.dim
        self.n = n
        self.occupied = bytearray(1 << n)
        for b in A.union_bits:
            self.occupied[b] = 1
        self.paths: List[List[int]] = [[p.a.bits] for p in A.pairs]
        self.targets: List[int] = [p.b.bits for p in A.pairs]
        self.done: List[bool] = [p.is_degenerate for p in A.pairs]
        self.free = (1 << n) - len(A.union_bits)
        self.balance = sum(
            1 if v.bit_count() & 1 else -1 for v in range(1 << n) if not self.occupied[v]
        )
        self.trail: List[Tuple[int, int]] = []
        self._steps = [1 << j for j in range(n)]

    @property
    def solved(self) -> bool:
        return self.free == 0 and all(self.done)

    def frontier(self, p: int) -> int:
        return self.paths[p][-1]

    def unfinished(self) -> List[int]:
        return [p for p, d in enumerate(self.done) if not d]

    def apply(self, p: int, w: int) -> None:
        if w == FINISH:
            self.done[p] = True
            self.paths[p].append(self.targets[p])
        else:
            self.occupied[w] = 1
            self.free -= 1
            self.balance -= 1 if w.bit_count() & 1 else -1
            self.paths[p].append(w)
        self.trail.append((p, w))

    def undo(self) -> None:
        p, w = self.trail.pop()
        self.paths[p].pop()
        if w == FINISH:
            self.done[p] = False
        else:
            self.occupied[w] = 0
            self.free += 1
            self.balance += 1 if w.bit_count() & 1 else -1

    def free_degree(self, v: int) -> int:
        return sum(1 for s in self._steps if not self.occupied[v ^ s])

    def moves(self, p: int) -> List[int]:
        """Extensions of pair p, most constrained vertex first; finishing last"""
        f = self.frontier(p)
        out = sorted(
            (f ^ s for s in self._steps if not self.occupied[f ^ s]),
            key=self.free_degree,
        )
        if (f ^ self.targets[p]).bit_count() == 1:
            out.append(FINISH)
        return out

    def feasible(self) -> bool:
        """Necessary conditions: parity balance, no dead vertex, coverable components"""
        open_pairs = self.unfinished()
        if self.balance != sum(
            _balance_term(self.frontier(p), self.targets[p]) for p in open_pairs
        ):
            return False

        ends: Set[int] = set()
        for p in open_pairs:
            ends.add(self.frontier(p))
            ends.add(self.targets[p])
        occ = self.occupied
        steps = self._steps
        size = 1 << self.n

        comp = [-1] * size
        comp_balance: List[int] = []
        for v in range(size):
            if occ[v]:
                continue
            usable = sum(1 for s in steps if not occ[v ^ s] or (v ^ s) in ends)
            if usable < 2:
                return False
            if comp[v] >= 0:
                continue
            cid = len(comp_balance)
            comp[v] = cid
            bal = 0
            queue = deque([v])
            while queue:
                u = queue.popleft()
                bal += 1 if u.bit_count() & 1 else -1
                for s in steps:
                    w = u ^ s
                    if not occ[w] and comp[w] < 0:
                        comp[w] = cid
                        queue.append(w)
            comp_balance.append(bal)

        if not comp_balance:
            # nothing left to cover: each open pair must be one step from its target
            return all(
                (self.frontier(p) ^ self.targets[p]).bit_count() == 1 for p in open_pairs
            )
        if len(comp_balance) > len(open_pairs):
            return False

        touchers: Dict[int, List[int]] = {cid: [] for cid in range(len(comp_balance))}
        for p in open_pairs:
            f, b = self.frontier(p), self.targets[p]
            near_f = {comp[f ^ s] for s in steps if not occ[f ^ s]}
            near_b = {comp[b ^ s] for s in steps if not occ[b ^ s]}
            touched = near_f & near_b
            if not touched and (f ^ b).bit_count() != 1:
                return False
            for cid in touched:
                touchers[cid].append(p)

        owned: Dict[int, int] = {}
        for cid, ps in touchers.items():
            if not ps:
                return False
            if len(ps) == 1:
                p = ps[0]
                if p in owned:
                    return False
                owned[p] = cid
                if comp_balance[cid] != _balance_term(self.frontier(p), self.targets[p]):
                    return False
        return True

    def choose(self, rng: Optional[random.Random]) -> List[Tuple[int, int]]:
        """Moves of the open pair with the fewest options"""
        best: Optional[List[int]] = None
        best_p = -1
        for p in self.unfinished():
            options = self.moves(p)
            if best is None or len(options) < len(best):
                best, best_p = options, p
                if not options:
                    return []
        if best is None:
            return []
        if rng is not None and len(best) > 1:
            head = [w for w in best if w != FINISH]
            rng.shuffle(head)
            head.sort(key=self.free_degree)
            best = head + [w for w in best if w == FINISH]
        return [(best_p, w) for w in best]


def search_connector(
    A: PairSet,
    budget: Optional[int] = None,
    exhaustive: bool = True,
    seed: Optional[int] = None,
) -> SearchResult:
    """
    Search for a connector of A.

    In exhaustive mode (n <= 5) an EXHAUSTED result proves that A is not
    connectable, up to the token it carries. In heuristic mode the search
    runs at any dimension and stops at the node budget.

    Args:
        A: Pair-set to connect
        budget: Node limit; None is unlimited (exhaustive mode only)
        exhaustive: Whether a negative verdict is being claimed
        seed: Tie-breaking seed for heuristic restarts

    Raises:
        DimensionTooLargeError: If exhaustive mode is asked for n > 5
        BudgetExceededError: If the node budget runs out
    """
    if exhaustive and A.dim > EXHAUSTIVE_MAX_DIMENSION:
        raise DimensionTooLargeError(
            f"Exhaustive search is limited to n <= {EXHAUSTIVE_MAX_DIMENSION}, got {A.dim}"
        )
    if not exhaustive and budget is None:
        raise ValueError("Heuristic search needs a node budget")

    rng = random.Random(seed) if seed is not None else None
    state = SearchState(A)
    nodes = 0
    if state.solved:
        return SearchResult(SearchOutcome.FOUND, 0, Connector.from_bits(A.dim, state.paths))
    if not state.feasible():
        return SearchResult(SearchOutcome.EXHAUSTED, 0, token=exhaustion_token(A, 0))

    stack = [iter(state.choose(rng))]
    while stack:
        move = next(stack[-1], None)
        if move is None:
            stack.pop()
            if state.trail:
                state.undo()
            continue
        if budget is not None and nodes >= budget:
            logger.debug(f"Search budget of {budget} nodes exhausted on {A!r}")
            raise BudgetExceededError(nodes, f"Search exceeded {budget} nodes")
        nodes += 1
        state.apply(*move)
        if state.solved:
            logger.debug(f"Connector found after {nodes} nodes")
            return SearchResult(
                SearchOutcome.FOUND, nodes, Connector.from_bits(A.dim, state.paths)
            )
        if not state.feasible():
            state.undo()
            continue
        stack.append(iter(state.choose(rng)))

    logger.debug(f"Search space exhausted after {nodes} nodes for {A!r}")
    return SearchResult(SearchOutcome.EXHAUSTED, nodes, token=exhaustion_token(A, nodes))


def naive_search(A: PairSet) -> Optional[Connector]:
    """
    Route the pairs one after another through free vertices, with no
    pruning beyond memoized dead states. Used to cross-check the pruned
    search at n <= 4.

    Raises:
        DimensionTooLargeError: If n > 4
    """
    n = A.dim
    if n > 4:
        raise DimensionTooLargeError(f"Naive search is limited to n <= 4, got {n}")
    pairs = A.pairs
    full = (1 << (1 << n)) - 1
    start_occ = 0
    for b in A.union_bits:
        start_occ |= 1 << b
    paths: List[List[int]] = [[p.a.bits] for p in pairs]
    dead: Set[Tuple[int, int, int]] = set()

    def start(idx: int, occ: int) -> bool:
        if idx == len(pairs):
            return occ == full
        paths[idx] = [pairs[idx].a.bits]
        return route(idx, pairs[idx].a.bits, occ)

    def route(idx: int, frontier: int, occ: int) -> bool:
        target = pairs[idx].b.bits
        if frontier == target:
            return start(idx + 1, occ)
        key = (occ, idx, frontier)
        if key in dead:
            return False
        for j in range(n):
            w = frontier ^ (1 << j)
            if w == target:
                paths[idx].append(w)
                if start(idx + 1, occ):
                    return True
                paths[idx].pop()
            elif not occ >> w & 1:
                paths[idx].append(w)
                if route(idx, w, occ | 1 << w):
                    return True
                paths[idx].pop()
        dead.add(key)
        return False

    if not pairs:
        return None
    if start(0, start_occ):
        return Connector.from_bits(n, paths)
    return None
