"""Completion Service

Turns a balanced pair-set A into an i-completion B, a pair-set whose pairs
all lie inside one of the half-cubes {alpha(i)=0}, {alpha(i)=1}, such that
B merges back into A along a recorded script of cross edges. Connectors of
the two halves of B then splice into a connector of A.
"""

import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Set, Tuple

from cubepaths.models.hypercube import CubePathsError, Vertex
from cubepaths.models.pairset import (
    Matching,
    Pair,
    PairSet,
    merge_at,
    rho_set,
    sigma,
)
from cubepaths.services.classification_service import (
    UnbalancedError,
    build_matching,
    validate_matching,
)

logger = logging.getLogger(__name__)


class CompletionFailure(CubePathsError):
    """Exception raised when a step finds no admissible gamma"""

    def __init__(self, stuck_step: "StepKind", message: str):
        super().__init__(message)
        self.stuck_step = stuck_step


class BadMatchingError(CubePathsError):
    """Exception raised when the supplied matching is not an (A, i)-matching"""
    pass


class PreconditionViolatedError(CubePathsError):
    """Exception raised when a completion variant's precondition fails"""

    def __init__(self, clause: str, message: str):
        super().__init__(message)
        self.clause = clause


class StepKind(str, Enum):
    KEEP_ODD = "i"
    SPLIT_ODD = "ii"
    KEEP_COUPLE = "iii"
    ONE_SPLIT = "iv"
    OPPOSITE_SIDES = "v"
    BOTH_SPLIT = "vi"


@dataclass(frozen=True)
class CompletionStrategy:
    """
    How free choices are made.

    prefer_adjacent: pick gamma next to the kept endpoint when possible, so
        split odd pairs leave an edge pair behind.
    avoid_enc: reject gammas that would create an encompassed vertex in
        either half.
    edge_side: for split odd pairs, keep the endpoint on this side (the
        side that receives the new edge pairs); None picks at random.
    even_side: side that receives the two even pairs of steps (v)/(vi);
        None balances even pairs between the halves.
    """

    prefer_adjacent: bool = False
    avoid_enc: bool = False
    edge_side: Optional[int] = None
    even_side: Optional[int] = None


@dataclass(frozen=True)
class CompletionStep:
    kind: StepKind
    consumed: Tuple[int, ...]
    chosen: Tuple[Vertex, ...]
    produced: Tuple[Pair, ...]
    merges: Tuple[Tuple[Vertex, Vertex], ...]


@dataclass(frozen=True)
class CompletionTallies:
    """Per-side counts driving the size bounds of a completion"""

    k0: int
    k1: int
    k2: int
    m_odd: Tuple[int, int]
    m_even: Tuple[int, int]
    m_three: Tuple[int, int]

    def completed_size(self, size: int) -> int:
        """|B| of every completion of a pair-set with ``size`` pairs"""
        return 2 * size - self.k0 - 2 * self.k1 - self.k2


@dataclass
class CompletionTrace:
    """Full record of one completion run"""

    coordinate: int
    source: PairSet
    matching: Matching
    steps: List[CompletionStep]
    result: PairSet
    seed: int
    strategy: CompletionStrategy = field(default_factory=CompletionStrategy)

    @property
    def merge_script(self) -> List[Tuple[Vertex, Vertex]]:
        return [edge for step in self.steps for edge in step.merges]

    def halves(self) -> Tuple[PairSet, PairSet]:
        i = self.coordinate
        return rho_set(self.result, i, 0), rho_set(self.result, i, 1)

    def replay(self) -> PairSet:
        """Merge B back along the script; equals the source pair-set"""
        current = self.result
        for u, v in self.merge_script:
            current = merge_at(current, u, v)
        return current

    def partials(self) -> Iterator[PairSet]:
        """Partial completions after each step: produced pairs plus untouched pairs"""
        consumed: Set[int] = set()
        produced: List[Pair] = []
        yield self.source
        for step in self.steps:
            consumed.update(step.consumed)
            produced.extend(step.produced)
            rest = [p for idx, p in enumerate(self.source.pairs) if idx not in consumed]
            yield PairSet(self.source.dim, tuple(rest) + tuple(produced))

    def tallies(self) -> CompletionTallies:
        return tally(self.source, self.matching)

    def side_size(self, k: int) -> int:
        """|rho_{i=k}(B)|; the same for every completion of the source"""
        t = self.tallies()
        return len(self.source) - (t.m_odd[1 - k] + 2 * t.m_even[1 - k] + t.m_three[1 - k])

    def targeted_even_pairs(self, k: int) -> int:
        """Even pairs of rho_{i=k}(B) when every (v)/(vi) step sends its even pairs to side k"""
        t = self.tallies()
        return 2 * (len(self.matching) - t.m_even[1 - k] - t.m_three[1 - k])


def tally(A: PairSet, R: Matching) -> CompletionTallies:
    i = R.coordinate
    m_odd = [0, 0]
    for p in A.pairs:
        if p.is_odd and p.side(i) is not None:
            m_odd[p.side(i)] += 1
    m_even = [0, 0]
    m_three = [0, 0]
    for x, y in R.couples:
        P, Q = A.pairs[x], A.pairs[y]
        ones = sum(v.coord(i) for v in (P.a, P.b, Q.a, Q.b))
        if ones in (0, 4):
            m_even[ones // 4] += 1
        elif ones in (1, 3):
            # three endpoints share the side given by the majority value
            m_three[ones // 2] += 1
    return CompletionTallies(
        k0=m_odd[0] + m_odd[1],
        k1=m_even[0] + m_even[1],
        k2=m_three[0] + m_three[1],
        m_odd=(m_odd[0], m_odd[1]),
        m_even=(m_even[0], m_even[1]),
        m_three=(m_three[0], m_three[1]),
    )


def guaranteed(A: PairSet, R: Matching) -> bool:
    """Whether the counting bound guarantees success for every choice sequence"""
    t = tally(A, R)
    room = 1 << (A.dim - 2)
    if 2 * len(A) - t.k0 - 2 * t.k1 - t.k2 <= room:
        return True
    return A.is_odd and 2 * len(A) - t.k0 - 1 <= room


class _Engine:
    """One run of the completion steps over a fixed coordinate"""

    def __init__(self, A: PairSet, i: int, R: Matching, strategy: CompletionStrategy, rng: random.Random):
        self.A = A
        self.i = i
        self.R = R
        self.strategy = strategy
        self.rng = rng
        self.n = A.dim
        self.e = 1 << i
        self.occupied: Set[int] = set(A.union_bits)
        self.steps: List[CompletionStep] = []
        self.produced: List[Pair] = []
        self.even_count = [0, 0]

    def vertex(self, bits: int) -> Vertex:
        return Vertex(bits, self.n)

    def _encloses(self, v: int) -> bool:
        """Some free neighbour of v inside v's half has its whole half-neighbourhood occupied"""
        occ = self.occupied
        inside = [1 << j for j in range(self.n) if j != self.i]
        for step in inside:
            eta = v ^ step
            if eta not in occ and all(eta ^ s in occ for s in inside):
                return True
        return False

    def _admissible(self, g: int) -> bool:
        if g in self.occupied or g ^ self.e in self.occupied:
            return False
        if not self.strategy.avoid_enc:
            return True
        self._take(g)
        try:
            # only neighbours of the two new endpoints can become encompassed
            return not (self._encloses(g) or self._encloses(g ^ self.e))
        finally:
            self.occupied.discard(g)
            self.occupied.discard(g ^ self.e)

    def _candidates(self, side: int, parity: int, near: Optional[int] = None) -> List[int]:
        """Free gammas with gamma(i) = side and chi(gamma) = parity, adjacent ones first if asked"""
        if near is not None and self.strategy.prefer_adjacent:
            close = [
                near ^ (1 << j) for j in range(self.n)
                if j != self.i and self._parity(near ^ (1 << j)) == parity
                and self._admissible(near ^ (1 << j))
            ]
            if close:
                return close
        side_mask = side << self.i
        return [
            g for g in range(1 << self.n)
            if g & self.e == side_mask and self._parity(g) == parity and self._admissible(g)
        ]

    @staticmethod
    def _parity(bits: int) -> int:
        return -1 if bits.bit_count() & 1 else 1

    def _take(self, g: int) -> None:
        self.occupied.add(g)
        self.occupied.add(g ^ self.e)

    def _record(self, kind, consumed, chosen, produced, merges) -> None:
        produced = tuple(produced)
        self.steps.append(CompletionStep(
            kind=kind,
            consumed=tuple(consumed),
            chosen=tuple(self.vertex(g) for g in chosen),
            produced=produced,
            merges=tuple((self.vertex(u), self.vertex(v)) for u, v in merges),
        ))
        self.produced.extend(produced)
        for p in produced:
            if p.is_even:
                self.even_count[p.a.coord(self.i)] += 1

    def _pair(self, a: int, b: int) -> Pair:
        return Pair(self.vertex(a), self.vertex(b))

    def run(self) -> List[CompletionStep]:
        A, i = self.A, self.i
        in_couple = {idx for couple in self.R.couples for idx in couple}
        odd_aligned = [idx for idx, p in enumerate(A.pairs) if p.is_odd and p.side(i) is not None]
        odd_split = [idx for idx, p in enumerate(A.pairs) if p.is_odd and p.side(i) is None]
        if any(idx in in_couple for idx in odd_aligned + odd_split):
            raise BadMatchingError("Matching couples an odd pair")

        for idx in odd_aligned:
            self._record(StepKind.KEEP_ODD, (idx,), (), (A.pairs[idx],), ())
        for idx in odd_split:
            self._split_odd(idx)
        for x, y in self.R.couples:
            self._couple(x, y)
        return self.steps

    def _split_odd(self, idx: int) -> None:
        p = self.A.pairs[idx]
        ends = [p.a.bits, p.b.bits]
        if self.strategy.edge_side is not None:
            ends.sort(key=lambda b: (b >> self.i) & 1 != self.strategy.edge_side)
        else:
            self.rng.shuffle(ends)
        alpha, beta = ends
        side = (alpha >> self.i) & 1
        candidates = self._candidates(side, -self._parity(alpha), near=alpha)
        if not candidates:
            raise CompletionFailure(StepKind.SPLIT_ODD, f"No gamma for split pair {p!r}")
        g = self.rng.choice(candidates)
        self._take(g)
        self._record(
            StepKind.SPLIT_ODD, (idx,), (g,),
            (self._pair(alpha, g), self._pair(g ^ self.e, beta)),
            ((g, g ^ self.e),),
        )

    def _pick_even_side(self, options: Sequence[int]) -> int:
        if len(options) == 1:
            return options[0]
        if self.strategy.even_side is not None:
            return self.strategy.even_side
        if self.even_count[0] != self.even_count[1]:
            return 0 if self.even_count[0] < self.even_count[1] else 1
        return self.rng.choice(list(options))

    def _couple(self, x: int, y: int) -> None:
        P, Q = self.A.pairs[x], self.A.pairs[y]
        i = self.i
        sp, sq = P.side(i), Q.side(i)
        if sp is not None and sq is not None and sp == sq:
            self._record(StepKind.KEEP_COUPLE, (x, y), (), (P, Q), ())
        elif sp is not None and sq is not None:
            self._opposite_sides(x, y, P, Q)
        elif sp is not None or sq is not None:
            self._one_split(x, y, P, Q)
        else:
            self._both_split(x, y, P, Q)

    def _one_split(self, x: int, y: int, P: Pair, Q: Pair) -> None:
        if P.side(self.i) is None:
            x, y, P, Q = y, x, Q, P
        s = P.side(self.i)
        alpha_, beta_ = (Q.a.bits, Q.b.bits) if Q.a.coord(self.i) == s else (Q.b.bits, Q.a.bits)
        candidates = self._candidates(s, self._parity(alpha_))
        if not candidates:
            raise CompletionFailure(StepKind.ONE_SPLIT, f"No gamma for couple {P!r}, {Q!r}")
        g = self.rng.choice(candidates)
        self._take(g)
        self._record(
            StepKind.ONE_SPLIT, (x, y), (g,),
            (P, self._pair(alpha_, g), self._pair(g ^ self.e, beta_)),
            ((g, g ^ self.e),),
        )

    def _pick_pair(self, side: int, parity: int, second_parity: Optional[int] = None) -> Optional[Tuple[int, int]]:
        """Two distinct admissible gammas on a side; the second's parity may differ"""
        if second_parity is None:
            second_parity = parity
        first = self._candidates(side, parity)
        self.rng.shuffle(first)
        for g in first:
            self._take(g)
            rest = [h for h in self._candidates(side, second_parity) if h != g]
            if rest:
                h = self.rng.choice(rest)
                self._take(h)
                return g, h
            self.occupied.discard(g)
            self.occupied.discard(g ^ self.e)
        return None

    def _opposite_sides(self, x: int, y: int, P: Pair, Q: Pair) -> None:
        # a degenerate pair cannot be rerouted, so it stays and fixes the side
        if P.is_degenerate:
            options = [P.side(self.i)]
        elif Q.is_degenerate:
            options = [Q.side(self.i)]
        else:
            options = [0, 1]
        k = self._pick_even_side(options)
        # the pair on side k stays; the other one is rerouted
        if P.side(self.i) != k:
            x, y, P, Q = y, x, Q, P
        if self.strategy.even_side is not None and k != self.strategy.even_side:
            raise PreconditionViolatedError(
                "even_side", f"Degenerate couple forces even pairs onto side {k}"
            )
        t = Q.side(self.i)
        alpha_, beta_ = Q.a.bits, Q.b.bits
        picked = self._pick_pair(t, -self._parity(alpha_))
        if picked is None:
            raise CompletionFailure(StepKind.OPPOSITE_SIDES, f"No gammas for couple {P!r}, {Q!r}")
        g, h = picked
        e = self.e
        self._record(
            StepKind.OPPOSITE_SIDES, (x, y), (g, h),
            (P, self._pair(alpha_, g), self._pair(beta_, h), self._pair(g ^ e, h ^ e)),
            ((g, g ^ e), (h ^ e, h)),
        )

    def _both_split(self, x: int, y: int, P: Pair, Q: Pair) -> None:
        t = self._pick_even_side([0, 1])
        i = self.i
        alpha, beta = (P.a.bits, P.b.bits) if P.a.coord(i) == t else (P.b.bits, P.a.bits)
        alpha_, beta_ = (Q.a.bits, Q.b.bits) if Q.a.coord(i) == t else (Q.b.bits, Q.a.bits)
        picked = self._pick_pair(t, self._parity(alpha), self._parity(alpha_))
        if picked is None:
            raise CompletionFailure(StepKind.BOTH_SPLIT, f"No gammas for couple {P!r}, {Q!r}")
        g, h = picked
        e = self.e
        self._record(
            StepKind.BOTH_SPLIT, (x, y), (g, h),
            (self._pair(alpha, g), self._pair(alpha_, h),
             self._pair(g ^ e, beta), self._pair(h ^ e, beta_)),
            ((g, g ^ e), (h, h ^ e)),
        )


def complete(
    A: PairSet,
    i: int,
    R: Optional[Matching] = None,
    strategy: Optional[CompletionStrategy] = None,
    seed: int = 0,
) -> CompletionTrace:
    """
    Run the completion steps on A at coordinate i.

    Odd aligned pairs are kept, split odd pairs are rerouted through a
    cross edge (gamma, gamma + e_i), and matched couples of even pairs are
    handled by the four couple steps. All free choices draw from a
    ``random.Random(seed)``, so a fixed seed gives a fixed trace.

    Raises:
        UnbalancedError: If A is not balanced
        BadMatchingError: If R is not an (A, i)-matching
        CompletionFailure: If some step has no admissible gamma
    """
    if not A.is_balanced:
        raise UnbalancedError("Completion needs a balanced pair-set")
    if not len(A):
        raise PreconditionViolatedError("nonempty", "Completion needs a nonempty pair-set")
    rng = random.Random(seed)
    if R is None:
        R = build_matching(A, i, rng)
    elif R.coordinate != i or not validate_matching(A, R):
        raise BadMatchingError(f"Not an (A,{i})-matching: {R.couples}")
    strategy = strategy or CompletionStrategy()

    engine = _Engine(A, i, R, strategy, rng)
    steps = engine.run()
    result = PairSet(A.dim, tuple(engine.produced))
    logger.debug(f"Completion at i={i}, seed={seed}: |A|={len(A)} -> |B|={len(result)}")
    return CompletionTrace(
        coordinate=i, source=A, matching=R, steps=steps,
        result=result, seed=seed, strategy=strategy,
    )


def _side_union_has_enc(A: PairSet, i: int, k: int) -> bool:
    """enc of the projection of all endpoints of A lying in {alpha(i)=k}"""
    n, e = A.dim, 1 << i
    side = {b for b in A.union_bits if b & e == k << i}
    for v in range(1 << n):
        if v & e != k << i or v in side:
            continue
        if all(v ^ (1 << j) in side for j in range(n) if j != i):
            return True
    return False


def complete_enc_preserving(
    A: PairSet, i: int, seed: int = 0, prefer_adjacent: bool = True, edge_side: Optional[int] = None
) -> CompletionTrace:
    """
    Completion of an odd pair-set whose two halves stay free of
    encompassed vertices.

    Raises:
        PreconditionViolatedError: With the failing clause ("odd",
            "size bound", "half size" or "enc")
        CompletionFailure: Only on a defect; logged as an error
    """
    if not A.is_odd:
        raise PreconditionViolatedError("odd", "Enc-preserving completion needs an odd pair-set")
    n0, n1 = sigma(A, i)
    n = A.dim
    if not 2 * len(A) - n0 - n1 < 1 << (n - 2):
        raise PreconditionViolatedError("size bound", f"2|A| - n0 - n1 >= 2^{n - 2}")
    if len(A) - n0 > n - 1 or len(A) - n1 > n - 1:
        raise PreconditionViolatedError("half size", "a half would exceed n-1 pairs")
    if _side_union_has_enc(A, i, 0) or _side_union_has_enc(A, i, 1):
        raise PreconditionViolatedError("enc", "a half already encompasses a free vertex")
    strategy = CompletionStrategy(prefer_adjacent=prefer_adjacent, avoid_enc=True, edge_side=edge_side)
    try:
        return complete(A, i, Matching(i, ()), strategy, seed)
    except CompletionFailure:
        logger.error(f"Enc-preserving completion failed under its preconditions: {A!r}, i={i}")
        raise


def complete_parity_targeted(
    A: PairSet, i: int, R: Optional[Matching], k: int, seed: int = 0
) -> CompletionTrace:
    """
    Completion sending the even pairs of every (v)/(vi) step to side k, so
    that rho_{i=k}(B) holds ``targeted_even_pairs(k)`` even pairs.

    Raises:
        PreconditionViolatedError: If 2|A| > 2^{n-2} or a degenerate
            couple forces the other side
    """
    if 2 * len(A) > 1 << (A.dim - 2):
        raise PreconditionViolatedError("size bound", f"2|A| > 2^{A.dim - 2}")
    return complete(A, i, R, CompletionStrategy(even_side=k), seed)
