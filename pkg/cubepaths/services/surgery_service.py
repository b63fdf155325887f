"""Path Surgery Service

Connector constructions for odd pair-sets that a plain completion does not
reach: nearly all pairs on one side of a coordinate, or split pairs whose
halves would come out too large. Each route solves one instance on the
home side h, cuts the resulting paths at chosen vertices, solves a small
balanced auxiliary pair-set on the other side, and splices the pieces back
together across coordinate i. Every result is verified before it is
returned.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

from cubepaths.models.connector import Connector, lift_paths, orient_paths, splice_paths
from cubepaths.models.hypercube import CubePathsError, Vertex, iota_bits, rho_bits
from cubepaths.models.pairset import Pair, PairSet, rho_set, sigma, split_pairs
from cubepaths.services.verify_service import check

logger = logging.getLogger(__name__)

SolveFn = Callable[[PairSet], Optional[Connector]]

MAX_CUT_EDGES = 8


@dataclass
class SurgeryOutcome:
    route: str
    variant: str
    connector: Connector
    case: Optional[str] = None


@dataclass
class _Plan:
    """Home-side paths in Q_{n-1}, auxiliary pairs in Q_{n-1}, merges in Q_n"""

    variant: str
    home: List[List[int]]
    aux: List[Tuple[int, int]]
    merges: List[Tuple[int, int]] = field(default_factory=list)
    case: Optional[str] = None  # branch label: A-C for lift-pair, 1 and 2.1.x for the two-split routes


class _Context:
    def __init__(self, A: PairSet, i: int, h: int, solve: SolveFn):
        self.A = A
        self.i = i
        self.h = h
        self.o = 1 - h
        self.n = A.dim
        self.e = 1 << i
        self.solve = solve
        self.home_pairs = [p for p in A.pairs if p.side(i) == h]
        self.other = rho_set(A, i, self.o)
        self.split = split_pairs(A, i)

    def hat(self, v: Vertex) -> int:
        return rho_bits(self.i, v.bits)

    def up(self, x: int, k: int) -> int:
        return iota_bits(self.i, k, x)

    def cross(self, x: int) -> Tuple[int, int]:
        """Merge from the home copy of x to its other-side copy"""
        return self.up(x, self.h), self.up(x, self.o)

    def back(self, x: int) -> Tuple[int, int]:
        return self.up(x, self.o), self.up(x, self.h)

    def home_instance(self, extra: Sequence[Pair] = (), drop: Sequence[Pair] = ()) -> Optional[PairSet]:
        pairs = [p for p in self.home_pairs if p not in drop] + list(extra)
        if not pairs:
            return None
        projected = PairSet(self.n, tuple(pairs))
        H = rho_set(projected, self.i, self.h)
        return H if H.is_pairset and len(H) else None

    def execute(self, plan: _Plan) -> Optional[Connector]:
        try:
            aux = PairSet(self.n - 1, tuple(self.other.pairs) + tuple(
                Pair(Vertex(x, self.n - 1), Vertex(y, self.n - 1)) for x, y in plan.aux
            ))
        except CubePathsError:
            return None
        if not aux.is_pairset or not aux.is_balanced:
            return None
        solved = self.solve(aux)
        if solved is None:
            return None
        paths = lift_paths(plan.home, self.i, self.h) + lift_paths(solved.bit_paths(), self.i, self.o)
        try:
            C = orient_paths(self.A, splice_paths(paths, plan.merges))
        except (CubePathsError, KeyError) as e:
            logger.debug(f"Surgery {plan.variant} could not splice: {e}")
            return None
        violation = check(self.A, C)
        if violation is not None:
            logger.error(f"Surgery {plan.variant} produced a rejected connector: {violation}")
            return None
        return C


def _locate(paths: List[List[int]], x: int) -> Tuple[int, int]:
    for idx, path in enumerate(paths):
        if x in path:
            return idx, path.index(x)
    raise KeyError(x)


def _cut_out(paths: List[List[int]], x: int) -> Tuple[List[List[int]], int, int]:
    """
    Remove interior vertex x from its path.

    Returns:
        The remaining paths plus the singleton [x], and x's two neighbours
    """
    idx, pos = _locate(paths, x)
    path = paths[idx]
    if pos == 0 or pos == len(path) - 1:
        raise KeyError(f"{x} is a path end")
    rest = [p for j, p in enumerate(paths) if j != idx]
    return rest + [path[:pos], [x], path[pos + 1:]], path[pos - 1], path[pos + 1]


def lift_pair(ctx: _Context) -> Iterator[_Plan]:
    """
    Solve the home side without one pair {a, b}, then route a..b either
    along its own home path segment or through the other side.
    """
    i = ctx.i
    for p in sorted(ctx.home_pairs, key=lambda q: not q.is_edge):
        H = ctx.home_instance(drop=(p,))
        if H is None:
            continue
        C = ctx.solve(H)
        if C is None:
            continue
        paths = C.bit_paths()
        a, b = ctx.hat(p.a), ctx.hat(p.b)
        ia, pa = _locate(paths, a)
        ib, pb = _locate(paths, b)
        if ia == ib:
            path = paths[ia]
            lo, hi = sorted((pa, pb))
            if path[lo] != a:
                # orient so the segment runs a..b
                path = path[::-1]
                lo, hi = len(path) - 1 - hi, len(path) - 1 - lo
            x, y = path[lo - 1], path[hi + 1]
            home = [q for j, q in enumerate(paths) if j != ia]
            home += [path[:lo], path[lo:hi + 1], path[hi + 1:]]
            adjacent = hi - lo == 1
            yield _Plan(
                "same path, adjacent" if adjacent else "same path, not adjacent",
                home, [(x, y)], [ctx.cross(x), ctx.back(y)],
                case="C" if adjacent else "B",
            )
        else:
            home, x, x_ = _cut_out(paths, a)
            home, y, y_ = _cut_out(home, b)
            yield _Plan(
                "different paths", home, [(x, x_), (a, b), (y, y_)],
                [ctx.cross(x), ctx.back(x_), ctx.cross(y), ctx.back(y_),
                 ctx.cross(a), ctx.back(b)],
                case="A",
            )


def detour_split(ctx: _Context) -> Iterator[_Plan]:
    """One split pair {a, b}, a at home: detour the home path around a"""
    p = ctx.split[0]
    a, b = (p.a, p.b) if p.a.coord(ctx.i) == ctx.h else (p.b, p.a)
    H = ctx.home_instance()
    if H is None:
        return
    C = ctx.solve(H)
    if C is None:
        return
    home, x, x_ = _cut_out(C.bit_paths(), ctx.hat(a))
    yield _Plan(
        "detour", home, [(x, x_), (ctx.hat(a), ctx.hat(b))],
        [ctx.cross(x), ctx.back(x_), ctx.cross(ctx.hat(a))],
    )


def _home_ends(ctx: _Context) -> List[Tuple[Vertex, Vertex]]:
    """Split pairs as (home endpoint, far endpoint)"""
    return [
        (p.a, p.b) if p.a.coord(ctx.i) == ctx.h else (p.b, p.a) for p in ctx.split
    ]


def anchor_split(ctx: _Context) -> Iterator[_Plan]:
    """
    Two split pairs whose home endpoints share parity: anchor a1 with a
    fresh home neighbour g, solve, detour around a0.
    """
    ends = _home_ends(ctx)
    used = ctx.A.union_bits
    for ((a0, b0), (a1, b1)), j in itertools.product((ends, ends[::-1]), range(ctx.n)):
        if j == ctx.i:
            continue
        g = a1.bits ^ (1 << j)
        if g in used or g ^ ctx.e in used:
            continue
        anchor = Pair(a1, Vertex(g, ctx.n))
        H = ctx.home_instance(extra=(anchor,))
        if H is None:
            continue
        C = ctx.solve(H)
        if C is None:
            continue
        h0, g_ = ctx.hat(a0), rho_bits(ctx.i, g)
        home, x, x_ = _cut_out(C.bit_paths(), h0)
        if g_ not in (x, x_):
            yield _Plan(
                "anchor apart", home,
                [(h0, ctx.hat(b0)), (x, x_), (g_, ctx.hat(b1))],
                [ctx.cross(h0), ctx.cross(x), ctx.back(x_), ctx.cross(g_)],
                case="1",
            )
            continue
        if x == g_:
            x, x_ = x_, x
        # path runs a1 .. x, a0, g; keep [a0, g] together
        paths = C.bit_paths()
        idx, pos = _locate(paths, h0)
        path = paths[idx]
        if path[pos + 1] != g_:
            path = path[::-1]
            pos = len(path) - 1 - pos
        home = [q for k, q in enumerate(paths) if k != idx] + [path[:pos], path[pos:]]
        yield _Plan(
            "anchor next to detour", home,
            [(g_, ctx.hat(b0)), (ctx.hat(b1), x)],
            [ctx.cross(x), ctx.cross(g_)],
            case="1",
        )


def join_split(ctx: _Context) -> Iterator[_Plan]:
    """
    Two split pairs whose home endpoints differ in parity: join them into
    one home pair, solve, and cut the joined path at an edge.
    """
    (a0, b0), (a1, b1) = _home_ends(ctx)
    H = ctx.home_instance(extra=(Pair(a0, a1),))
    if H is None:
        return
    C = ctx.solve(H)
    if C is None:
        return
    paths = C.bit_paths()
    h0, h1, f0, f1 = ctx.hat(a0), ctx.hat(a1), ctx.hat(b0), ctx.hat(b1)
    idx, _ = _locate(paths, h0)
    path = paths[idx]
    if path[0] != h0:
        path = path[::-1]
    rest = [q for k, q in enumerate(paths) if k != idx]

    if path == [h0, f1, f0, h1]:
        yield _Plan(
            "three-edge path through both far endpoints",
            rest + [[h0, f1, f0], [h1]],
            [(f0, f0), (h1, f1)],
            [ctx.cross(f0), ctx.cross(h1)],
            case="2.1.2",
        )

    # odd-distance cuts give odd auxiliary pairs, which are tried first
    cuts = sorted(range(len(path) - 1), key=lambda k: (k % 2 == 0, k))
    for k in cuts[:MAX_CUT_EDGES]:
        u, w = path[k], path[k + 1]
        single = len(path) == 2
        yield _Plan(
            "single-edge path" if single else "cut at an interior edge",
            rest + [path[:k + 1], path[k + 1:]],
            [(u, f0), (w, f1)],
            [ctx.cross(u), ctx.cross(w)],
            case="2.1.3" if single else "2.1.1",
        )


ROUTES = {
    "lift-pair": lift_pair,
    "detour-split": detour_split,
    "anchor-split": anchor_split,
    "join-split": join_split,
}


def home_side(A: PairSet, i: int) -> int:
    n0, n1 = sigma(A, i)
    return 0 if n0 >= n1 else 1


def route_for(A: PairSet, i: int, h: int) -> Optional[str]:
    """Route name matching the split pairs of A at coordinate i"""
    split = split_pairs(A, i)
    if not split:
        return "lift-pair"
    if len(split) == 1:
        return "detour-split"
    if len(split) == 2:
        homes = [p.a if p.a.coord(i) == h else p.b for p in split]
        return "anchor-split" if homes[0].parity == homes[1].parity else "join-split"
    return None


def run_surgery(A: PairSet, i: int, solve: SolveFn, h: Optional[int] = None) -> Optional[SurgeryOutcome]:
    """
    Try the route matching A at coordinate i until one plan verifies.

    Args:
        A: Odd pair-set in Q_n
        i: Coordinate to cut along
        solve: Connects an instance of Q_{n-1}, or returns None
        h: Home side; defaults to the side holding more pairs
    """
    if h is None:
        h = home_side(A, i)
    name = route_for(A, i, h)
    if name is None:
        return None
    ctx = _Context(A, i, h, solve)
    try:
        for plan in ROUTES[name](ctx):
            C = ctx.execute(plan)
            if C is not None:
                logger.info(f"Surgery {name} case {plan.case} ({plan.variant}) connected n={A.dim} at i={i}")
                return SurgeryOutcome(name, plan.variant, C, plan.case)
    except KeyError as e:
        logger.debug(f"Surgery {name} at i={i} has no cut vertex: {e}")
    return None
