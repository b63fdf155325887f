"""Tests for the Solver Service"""

import random

import pytest

from cubepaths.config import settings
from cubepaths.models.connector import Connector
from cubepaths.models.hypercube import Vertex
from cubepaths.models.pairset import Pair, PairSet, random_odd_pairset
from cubepaths.services.census_service import known_obstructions
from cubepaths.services.classification_service import pairset_from_key
from cubepaths.services.completion_service import complete
from cubepaths.services.solver_service import (
    CaseId,
    EvenDistanceError,
    InvalidInputError,
    Reason,
    Verdict,
    WrongSubproblemError,
    case_coordinates,
    gray_path,
    solve,
    special_case,
    stitch,
)
from cubepaths.services.verify_service import check, check_gray
from cubepaths.storage import MemorySink


def star(n: int) -> PairSet:
    pairs = [
        Pair(Vertex(1 << j, n), Vertex(1 << j | 1 << ((j + 1) % n), n)) for j in range(n)
    ]
    return PairSet.of(n, pairs)


def lifted(A: PairSet) -> PairSet:
    """A pair-set of Q_{n-1} placed in the half {alpha(n)=0} of Q_n"""
    n = A.dim + 1
    return PairSet.of(n, [Pair(Vertex(p.a.bits, n), Vertex(p.b.bits, n)) for p in A.pairs])


@pytest.fixture
def c2():
    """The non-connectable odd pair-set of Q_4"""
    (key,) = known_obstructions()
    return pairset_from_key(4, key)


@pytest.fixture
def cfg():
    return settings.model_copy(update={"seed": 11})


class TestObstructions:
    """Test verdicts reached without construction"""

    @pytest.mark.parametrize("n", range(3, 11))
    def test_encompassed_zero(self, n):
        """Edge pairs around the zero vector are not connectable"""
        report = solve(star(n))
        assert report.verdict == Verdict.NON_CONNECTABLE
        assert report.reason == Reason.ENC_OBSTRUCTION

    def test_c2(self, c2):
        """The exceptional pair-set of Q_4 and its images"""
        assert solve(c2).reason == Reason.C2
        flipped = PairSet.of(4, [Pair(p.a.flip(0), p.b.flip(0)) for p in c2.pairs])
        report = solve(flipped)
        assert report.verdict == Verdict.NON_CONNECTABLE
        assert report.reason == Reason.C2

    def test_even_pair(self):
        """Even pairs are refused unless balanced input is allowed"""
        A = PairSet.from_strings([("00000", "11000"), ("10000", "01000")])
        assert solve(A).reason == Reason.EVEN_PAIR

    def test_unbalanced(self):
        """An even pair without a partner can never be connected"""
        A = PairSet.from_strings([("00000", "11000")])
        report = solve(A, balanced=True)
        assert report.verdict == Verdict.NON_CONNECTABLE
        assert report.reason == Reason.UNBALANCED

    def test_exhaustive_at_small_n(self):
        """At n <= 4 a failed search is a proof"""
        antipodal = PairSet.from_strings([
            ("000", "111"), ("100", "011"), ("010", "101"), ("001", "110"),
        ])
        report = solve(antipodal)
        assert report.verdict == Verdict.NON_CONNECTABLE
        assert report.reason == Reason.EXHAUSTIVE
        assert report.strategy_path[0].startswith("n=3:exhausted:")

    def test_empty_input(self):
        """The empty pair-set is not a solver input"""
        with pytest.raises(InvalidInputError):
            solve(PairSet(5, ()))


class TestConstruction:
    """Test connectors built by the strategy ladder"""

    def test_single_pair(self, cfg):
        """A single pair of Q_6 is a Hamiltonian path"""
        A = PairSet.from_strings([("000000", "111000")])
        report = solve(A, cfg)
        assert report.connected
        assert report.connector.vertex_count == 64
        assert check(A, report.connector) is None

    @pytest.mark.parametrize("n", range(5, 11))
    def test_random_odd(self, n, cfg):
        """Random odd pair-sets with at most n-1 pairs connect and verify"""
        rng = random.Random(100 + n)
        sizes = [n - 1, n - 1, rng.randint(1, n - 2)]
        for size in sizes:
            A = random_odd_pairset(n, size, rng)
            report = solve(A, cfg)
            assert report.connected, report.strategy_path
            assert check(A, report.connector) is None
            assert report.strategy_path

    def test_balanced_mode(self, cfg):
        """Even pairs of opposite sign are connected in balanced mode"""
        A = PairSet.from_strings([("00000", "11000"), ("10000", "01000")])
        report = solve(A, cfg, balanced=True)
        assert report.connected
        assert check(A, report.connector) is None

    def test_trace_of_top_split(self, cfg):
        """The top-level completion is returned with the report"""
        A = PairSet.from_strings([("000000", "111000")])
        report = solve(A, cfg)
        assert report.trace is not None
        assert report.trace.source == A
        assert report.trace.replay() == A

    def test_same_seed_same_connector(self, cfg):
        """Solving twice with one seed gives one connector"""
        A = random_odd_pairset(6, 4, random.Random(8))
        assert solve(A, cfg).connector == solve(A, cfg).connector


class TestUnresolved:
    """Test the Unresolved verdict"""

    def test_persisted_to_sink(self):
        """Starved budgets give Unresolved and a regression record"""
        starved = settings.model_copy(update={"exhaustive_budget": 1, "fallback_budget": 1})
        A = PairSet.from_strings([("00000", "10000")])
        sink = MemorySink()
        report = solve(A, starved, sink=sink)
        assert report.verdict == Verdict.UNRESOLVED
        (record,) = sink.records()
        assert record["kind"] == "regression"
        assert record["seed"] == starved.seed
        assert record["pairset"] == {"n": 5, "pairs": [["00000", "10000"]]}


class TestStitch:
    """Test gluing half-cube connectors"""

    def test_wrong_subproblem(self):
        """Connectors of other pair-sets are refused"""
        A = PairSet.from_strings([("00000", "11001")])
        trace = complete(A, 4)
        with pytest.raises(WrongSubproblemError):
            stitch(trace, Connector(4, ()), Connector(4, ()))


class TestSpecialCases:
    """Test shape detection and surgery entry points"""

    def test_case_coordinates(self):
        """All pairs on one side of the last coordinate"""
        A = lifted(random_odd_pairset(4, 4, random.Random(5)))
        assert len(A) == A.dim - 1
        assert 4 in case_coordinates(A, CaseId.C1)
        assert case_coordinates(A, CaseId.C2) == []
        assert case_coordinates(A, CaseId.C3) == []

    def test_special_case_connects(self, cfg):
        """Five pairs inside one half of Q_6"""
        A = lifted(random_odd_pairset(5, 5, random.Random(6)))
        report = special_case(A, CaseId.C1, cfg)
        assert report.connected
        assert check(A, report.connector) is None

    def test_bad_coordinate_case(self, cfg):
        """A pair-set of Q_6 with a bad coordinate is connected through the C3 entry point"""
        A = PairSet.of(6, [
            Pair(Vertex(a, 6), Vertex(b, 6))
            for a, b in [(0, 38), (1, 33), (2, 3), (4, 5), (8, 9), (48, 49)]
        ])
        assert 5 in case_coordinates(A, CaseId.C3)
        report = special_case(A, CaseId.C3, cfg)
        assert report.connected
        assert check(A, report.connector) is None


class TestGrayPath:
    """Test Hamiltonian paths between prescribed endpoints"""

    @pytest.mark.parametrize("n", range(1, 8))
    def test_random_endpoints(self, n):
        """Paths start at alpha and end at beta"""
        rng = random.Random(n)
        for _ in range(3):
            alpha = Vertex(rng.randrange(1 << n), n)
            beta = alpha.flip(rng.randrange(n))
            for _ in range(rng.randrange(n)):
                beta = beta.flip(rng.randrange(n)).flip(rng.randrange(n))
            C = gray_path(n, alpha, beta)
            assert check_gray(n, C.paths[0], start=alpha, end=beta) is None

    @pytest.mark.parametrize("n", [10, 11, 12])
    def test_large_cubes(self, n, cfg):
        """Paths through every vertex of Q_10 to Q_12"""
        rng = random.Random(200 + n)
        for _ in range(2):
            alpha = Vertex(rng.randrange(1 << n), n)
            beta = Vertex(rng.choice([b for b in range(1 << n) if (b ^ alpha.bits).bit_count() % 2]), n)
            C = gray_path(n, alpha, beta, cfg)
            assert len(C.paths[0]) == 1 << n
            assert check_gray(n, C.paths[0], start=alpha, end=beta) is None

    def test_even_distance(self):
        """Endpoints of equal parity have no Gray path"""
        with pytest.raises(EvenDistanceError):
            gray_path(3, Vertex.parse("000"), Vertex.parse("110"))

    def test_wrong_dimension(self):
        """Endpoints must live in Q_n"""
        with pytest.raises(InvalidInputError):
            gray_path(4, Vertex.parse("000"), Vertex.parse("100"))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
