"""Solver Service

Inductive connector construction. Small dimensions go to the base search;
larger ones are split along a coordinate by a completion, the two halves
are solved recursively and stitched back together. Shapes a completion
cannot split go through path surgery, and a budgeted search is the last
resort. Every connector handed out has passed the verifier.
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

from cubepaths.config import Settings, settings
from cubepaths.models.connector import Connector, lift_paths, orient_paths, splice_paths
from cubepaths.models.hypercube import CubePathsError, Vertex
from cubepaths.models.pairset import Pair, PairSet, enc, sigma, split_pairs
from cubepaths.services.census_service import known_obstructions
from cubepaths.services.classification_service import (
    ConstraintInfeasibleAtIError,
    bad,
    canonical_key,
    is_diminishable,
    separating,
)
from cubepaths.services.completion_service import (
    CompletionFailure,
    CompletionStrategy,
    CompletionTrace,
    PreconditionViolatedError,
    complete,
)
from cubepaths.services.search_service import BudgetExceededError, search_connector
from cubepaths.services.surgery_service import run_surgery
from cubepaths.services.verify_service import check
from cubepaths.storage.backend import RecordSink
from cubepaths.storage.factory import get_record_sink

logger = logging.getLogger(__name__)


class EvenDistanceError(CubePathsError):
    """Exception raised when a Gray path is asked between vertices of equal parity"""
    pass


class WrongSubproblemError(CubePathsError):
    """Exception raised when half-cube connectors do not match a completion"""
    pass


class InvalidInputError(CubePathsError):
    """Exception raised when the solver input is not a usable pair-set"""
    pass


class UnresolvedError(CubePathsError):
    """Exception raised when a construction neither succeeds nor proves impossibility"""
    pass


class Verdict(str, Enum):
    CONNECTED = "connected"
    NON_CONNECTABLE = "non-connectable"
    UNRESOLVED = "unresolved"


class Reason(str, Enum):
    UNBALANCED = "unbalanced"
    EVEN_PAIR = "even-pair"
    ENC_OBSTRUCTION = "enc-obstruction"
    C2 = "C2"
    EXHAUSTIVE = "exhaustive"


class CaseId(str, Enum):
    """Shapes routed to path surgery"""
    C1 = "C1"  # |A| = n-1 with all aligned pairs on one side
    C2 = "C2"  # |A| = n, one aligned pair on the light side, separating
    C3 = "C3"  # bad coordinate


@dataclass
class SolveStats:
    completions: int = 0
    retries: int = 0
    surgeries: int = 0
    fallbacks: int = 0
    nodes: int = 0


@dataclass
class SolveReport:
    verdict: Verdict
    connector: Optional[Connector] = None
    reason: Optional[Reason] = None
    strategy_path: List[str] = field(default_factory=list)
    stats: SolveStats = field(default_factory=SolveStats)
    trace: Optional[CompletionTrace] = None

    @property
    def connected(self) -> bool:
        return self.verdict == Verdict.CONNECTED


_Found = Tuple[Connector, List[str]]


def stitch(trace: CompletionTrace, c0: Connector, c1: Connector) -> Connector:
    """
    Lift connectors of the two halves of a completion into Q_n and replay
    the merge script, giving a connector of the completion's source.

    Raises:
        WrongSubproblemError: If c0 or c1 is not a connector of its half
    """
    i = trace.coordinate
    for k, (half, c) in enumerate(zip(trace.halves(), (c0, c1))):
        violation = check(half, c)
        if violation is not None:
            raise WrongSubproblemError(f"Connector for side {k} does not fit its half: {violation}")
    paths = lift_paths(c0.bit_paths(), i, 0) + lift_paths(c1.bit_paths(), i, 1)
    merges = [(u.bits, v.bits) for u, v in trace.merge_script]
    return orient_paths(trace.source, splice_paths(paths, merges))


class _Solver:
    """State shared by one top-level solve: settings, statistics, memo"""

    def __init__(self, config: Settings):
        self.cfg = config
        self.stats = SolveStats()
        self.exhausted: Dict[PairSet, str] = {}
        self.top_trace: Optional[CompletionTrace] = None
        self._failed: Set[PairSet] = set()
        self._lock = threading.Lock()

    def _bump(self, name: str, amount: int = 1) -> None:
        with self._lock:
            setattr(self.stats, name, getattr(self.stats, name) + amount)

    def connect(self, A: PairSet, depth: int) -> Optional[_Found]:
        with self._lock:
            if A in self._failed:
                return None
        if A.dim <= self.cfg.base_dimension:
            found = self._base(A, depth)
        elif len(A) == 1:
            p = A.pairs[0]
            differing = [i for i in range(A.dim) if p.a.coord(i) != p.b.coord(i)]
            found = self._ladder(A, depth, differing)
        else:
            found = (
                self._ladder(A, depth, self.coordinate_order(A))
                or self._surgery(A, depth)
                or self._fallback(A, depth)
            )
        if found is None:
            with self._lock:
                self._failed.add(A)
        return found

    def _base(self, A: PairSet, depth: int) -> Optional[_Found]:
        budget = self.cfg.exhaustive_budget if depth == 0 else self.cfg.fallback_budget
        try:
            result = search_connector(A, budget=budget, exhaustive=True)
        except BudgetExceededError as e:
            self._bump("nodes", e.nodes)
            return None
        self._bump("nodes", result.nodes)
        if result.found:
            return result.connector, [f"n={A.dim}:base"]
        with self._lock:
            self.exhausted[A] = result.token
        return None

    def coordinate_order(self, A: PairSet) -> List[int]:
        """
        Coordinates whose completion leaves both halves nonempty, best
        balanced first. At n=6 with five pairs, coordinates aligning some
        pair come before those splitting every pair.
        """
        n = A.dim
        keyed = []
        for i in range(n):
            n0, n1 = sigma(A, i)
            s = len(A) - n0 - n1
            if n0 + s == 0 or n1 + s == 0:
                continue
            prefer_aligned = -(n0 + n1 > 0) if (n, len(A)) == (6, 5) else 0
            keyed.append((-min(n0, n1), prefer_aligned, i))
        return [i for *_, i in sorted(keyed)]

    def _seed(self, depth: int, i: int, attempt: int) -> int:
        return self.cfg.seed + 7919 * depth + 104729 * i + attempt

    def _strategy(self, A: PairSet, i: int, attempt: int) -> CompletionStrategy:
        if not A.is_odd:
            return CompletionStrategy()
        n0, n1 = sigma(A, i)
        return CompletionStrategy(
            prefer_adjacent=attempt % 4 != 3,
            avoid_enc=attempt % 2 == 0,
            edge_side=0 if n0 >= n1 else 1,
        )

    def _acceptable(self, B: PairSet) -> bool:
        if not len(B) or not B.is_pairset or not B.is_balanced:
            return False
        if B.is_odd:
            return is_diminishable(B).ok
        return True

    def _solve_halves(self, B0: PairSet, B1: PairSet, depth: int) -> Optional[Tuple[_Found, _Found]]:
        if self.cfg.threads > 1 and depth == 0:
            with ThreadPoolExecutor(max_workers=2) as pool:
                r0, r1 = pool.map(lambda B: self.connect(B, depth + 1), (B0, B1))
        else:
            r0 = self.connect(B0, depth + 1)
            if r0 is None:
                return None
            r1 = self.connect(B1, depth + 1)
        if r0 is None or r1 is None:
            return None
        return r0, r1

    def _ladder(self, A: PairSet, depth: int, coordinates: List[int]) -> Optional[_Found]:
        for i in coordinates:
            fanout = 0
            for attempt in range(self.cfg.retries):
                if fanout >= self.cfg.max_fanout:
                    break
                seed = self._seed(depth, i, attempt)
                try:
                    trace = complete(A, i, strategy=self._strategy(A, i, attempt), seed=seed)
                except (CompletionFailure, ConstraintInfeasibleAtIError, PreconditionViolatedError) as e:
                    logger.debug(f"n={A.dim} i={i} seed={seed}: completion failed: {e}")
                    self._bump("retries")
                    continue
                self._bump("completions")
                B0, B1 = trace.halves()
                if not (self._acceptable(B0) and self._acceptable(B1)):
                    self._bump("retries")
                    continue
                fanout += 1
                halves = self._solve_halves(B0, B1, depth)
                if halves is None:
                    continue
                (c0, s0), (c1, s1) = halves
                C = stitch(trace, c0, c1)
                violation = check(A, C)
                if violation is not None:
                    logger.error(f"Stitched connector rejected at n={A.dim}, i={i}: {violation}")
                    continue
                logger.info(f"n={A.dim}: split at i={i} (seed {seed}), |B0|={len(B0)}, |B1|={len(B1)}")
                if depth == 0:
                    self.top_trace = trace
                return C, [f"n={A.dim}:complete(i={i},seed={seed})"] + s0 + s1
        return None

    def _solve_sub(self, X: PairSet, depth: int) -> Optional[Connector]:
        found = self.connect(X, depth + 1)
        return found[0] if found else None

    def surgery_at(self, A: PairSet, coordinates: List[int], depth: int) -> Optional[_Found]:
        for i in coordinates:
            outcome = run_surgery(A, i, lambda X: self._solve_sub(X, depth))
            if outcome is not None:
                self._bump("surgeries")
                label = f"{outcome.route}:{outcome.case}" if outcome.case else outcome.route
                return outcome.connector, [f"n={A.dim}:surgery:{label}:{outcome.variant}(i={i})"]
        return None

    def _surgery(self, A: PairSet, depth: int) -> Optional[_Found]:
        if not A.is_odd:
            return None
        order = sorted(
            (i for i in range(A.dim) if len(split_pairs(A, i)) <= 2),
            key=lambda i: (-max(sigma(A, i)), i),
        )
        return self.surgery_at(A, order, depth)

    def _fallback(self, A: PairSet, depth: int) -> Optional[_Found]:
        self._bump("fallbacks")
        # feasibility checks grow with 2^n, so the node budget shrinks with it
        budget = max(1000, self.cfg.fallback_budget >> max(0, A.dim - 5))
        try:
            result = search_connector(A, budget=budget, exhaustive=False, seed=self.cfg.seed)
        except BudgetExceededError as e:
            self._bump("nodes", e.nodes)
            return None
        self._bump("nodes", result.nodes)
        if result.found:
            logger.info(f"n={A.dim}: fallback search found a connector in {result.nodes} nodes")
            return result.connector, [f"n={A.dim}:fallback"]
        return None


def _obstruction(A: PairSet, balanced: bool) -> Optional[Reason]:
    if not A.is_balanced:
        return Reason.UNBALANCED
    if not balanced and not A.is_odd:
        return Reason.EVEN_PAIR
    if A.is_odd and enc(A):
        return Reason.ENC_OBSTRUCTION
    if A.dim == 4 and A.is_odd and len(A) <= 3 and canonical_key(A) in known_obstructions():
        return Reason.C2
    return None


def _persist_unresolved(A: PairSet, cfg: Settings, path: List[str], sink: Optional[RecordSink]) -> None:
    sink = sink or get_record_sink()
    sink.append({
        "kind": "regression",
        "pairset": {"n": A.dim, "pairs": [[str(p.a), str(p.b)] for p in A.pairs]},
        "seed": cfg.seed,
        "strategy_path": path,
    })
    logger.warning(f"Unresolved instance persisted as a regression: {A!r}")


def solve(
    A: PairSet,
    config: Optional[Settings] = None,
    balanced: bool = False,
    sink: Optional[RecordSink] = None,
) -> SolveReport:
    """
    Decide A and, when it is connectable, build a verified connector.

    Args:
        A: Pair-set to connect
        config: Settings; the global settings when omitted
        balanced: Accept balanced input with even pairs (library mode)
        sink: Where Unresolved instances are persisted

    Returns:
        A SolveReport; NON_CONNECTABLE only for a recognized obstruction or
        an exhaustive search at n <= 4

    Raises:
        InvalidInputError: If A is empty or not a pair-set
    """
    cfg = config or settings
    if not len(A) or not A.is_pairset:
        raise InvalidInputError("solve needs a nonempty pair-set with a non-degenerate pair")

    reason = _obstruction(A, balanced)
    if reason is not None:
        logger.info(f"{A!r} is not connectable: {reason.value}")
        return SolveReport(Verdict.NON_CONNECTABLE, reason=reason)

    solver = _Solver(cfg)
    found = solver.connect(A, 0)
    if found is not None:
        connector, path = found
        violation = check(A, connector)
        if violation is None:
            return SolveReport(
                Verdict.CONNECTED, connector, strategy_path=path,
                stats=solver.stats, trace=solver.top_trace,
            )
        logger.error(f"Final connector rejected: {violation}")

    if A.dim <= 4 and A in solver.exhausted:
        return SolveReport(
            Verdict.NON_CONNECTABLE,
            reason=Reason.EXHAUSTIVE,
            strategy_path=[f"n={A.dim}:exhausted:{solver.exhausted[A]}"],
            stats=solver.stats,
        )
    path = [f"n={A.dim}:unresolved"]
    _persist_unresolved(A, cfg, path, sink)
    return SolveReport(Verdict.UNRESOLVED, strategy_path=path, stats=solver.stats)


def case_coordinates(A: PairSet, case_id: CaseId) -> List[int]:
    """Coordinates at which A has the shape of the given case"""
    n = A.dim
    coords = []
    for i in range(n):
        n0, n1 = sigma(A, i)
        if case_id == CaseId.C1 and len(A) == n - 1 and min(n0, n1) == 0:
            coords.append(i)
        elif case_id == CaseId.C2 and len(A) == n and min(n0, n1) == 1 and separating(A, i):
            coords.append(i)
        elif case_id == CaseId.C3 and len(A) == n and bad(A, i):
            coords.append(i)
    return coords


def special_case(A: PairSet, case_id: CaseId, config: Optional[Settings] = None) -> SolveReport:
    """
    Connect A through path surgery at the coordinates matching case_id,
    falling back to the full solver when no surgery plan verifies.
    """
    cfg = config or settings
    solver = _Solver(cfg)
    found = solver.surgery_at(A, case_coordinates(A, case_id), depth=0)
    if found is not None:
        connector, path = found
        return SolveReport(Verdict.CONNECTED, connector, strategy_path=path, stats=solver.stats)
    logger.info(f"No surgery plan for case {case_id.value}; using the strategy ladder")
    return solve(A, cfg)


def gray_path(n: int, alpha: Vertex, beta: Vertex, config: Optional[Settings] = None) -> Connector:
    """
    A Hamiltonian path of Q_n from alpha to beta, built by the same
    induction as every other connector.

    Raises:
        EvenDistanceError: If alpha and beta have the same parity
        UnresolvedError: If the solver finds no path
    """
    if alpha.dim != n or beta.dim != n:
        raise InvalidInputError(f"Endpoints must have dimension {n}")
    if alpha.parity == beta.parity:
        raise EvenDistanceError(f"{alpha} and {beta} are at even distance")
    report = solve(PairSet.of(n, [Pair(alpha, beta)]), config)
    if not report.connected:
        raise UnresolvedError(f"No Gray path found between {alpha} and {beta}")
    path = report.connector.paths[0]
    if path[0] != alpha:
        path = path[::-1]
    return Connector(n, (tuple(path),))
