"""Tests for the Connector Search Service"""

import random

import pytest

from cubepaths.models.hypercube import Vertex
from cubepaths.models.pairset import Pair, PairSet, random_balanced_pairset, random_odd_pairset
from cubepaths.services.classification_service import DimensionTooLargeError
from cubepaths.services.search_service import (
    BudgetExceededError,
    SearchOutcome,
    SearchState,
    exhaustion_token,
    naive_search,
    search_connector,
)
from cubepaths.services.verify_service import check


def star(n: int) -> PairSet:
    pairs = [
        Pair(Vertex(1 << j, n), Vertex(1 << j | 1 << ((j + 1) % n), n)) for j in range(n)
    ]
    return PairSet.of(n, pairs)


class TestExhaustiveSearch:
    """Test exhaustive search verdicts"""

    def test_single_pair_of_q3(self):
        """A Hamiltonian path between adjacent vertices of Q_3"""
        A = PairSet.from_strings([("000", "100")])
        result = search_connector(A)
        assert result.found
        assert check(A, result.connector) is None
        assert result.connector.vertex_count == 8

    def test_random_connectors_verify(self):
        """Every connector the search returns passes the verifier"""
        rng = random.Random(31)
        for _ in range(40):
            n = rng.randint(3, 5)
            A = random_odd_pairset(n, rng.randint(1, n - 1), rng)
            result = search_connector(A)
            if result.found:
                assert check(A, result.connector) is None
                assert A.is_balanced
            else:
                assert result.token

    def test_parity_obstruction_needs_no_search(self):
        """An even pair covering Q_2 fails the balance count before any move"""
        A = PairSet.from_strings([("00", "11")])
        result = search_connector(A)
        assert result.outcome == SearchOutcome.EXHAUSTED
        assert result.nodes == 0

    def test_encompassed_vertex(self):
        """An isolated free vertex makes the instance non-connectable"""
        result = search_connector(star(3))
        assert not result.found
        assert result.token.endswith(f":{result.nodes}")

    def test_degenerate_pairs(self):
        """Degenerate pairs become singleton paths"""
        A = PairSet(2, (
            Pair(Vertex.parse("00"), Vertex.parse("00")),
            Pair(Vertex.parse("10"), Vertex.parse("10")),
            Pair(Vertex.parse("01"), Vertex.parse("11")),
        ))
        result = search_connector(A)
        assert result.found
        assert check(A, result.connector) is None

    def test_dimension_limit(self):
        """Exhaustive verdicts stop at n = 5"""
        A = PairSet.from_strings([("000000", "100000")])
        with pytest.raises(DimensionTooLargeError):
            search_connector(A, exhaustive=True)

    def test_deterministic(self):
        """Repeated searches return the same connector"""
        A = random_odd_pairset(4, 3, random.Random(2))
        first, second = search_connector(A), search_connector(A)
        assert first.outcome == second.outcome
        assert first.connector == second.connector


def random_vertex_of_parity(n: int, parity: int, used, rng) -> Vertex:
    choices = [b for b in range(1 << n) if b not in used and Vertex(b, n).parity == parity]
    return Vertex(rng.choice(choices), n)


class TestKnownShapes:
    """Small shapes whose connectability is known in advance"""

    @pytest.mark.parametrize("n", range(1, 5))
    def test_singletons(self, n):
        """A single pair is connectable exactly when it is odd"""
        rng = random.Random(n)
        for _ in range(5):
            a = Vertex(rng.randrange(1 << n), n)
            b = random_vertex_of_parity(n, -a.parity, {a.bits}, rng)
            assert search_connector(PairSet.of(n, [Pair(a, b)])).found
            if n >= 2:
                c = random_vertex_of_parity(n, a.parity, {a.bits}, rng)
                assert not search_connector(PairSet.of(n, [Pair(a, c)])).found

    @pytest.mark.parametrize("n", range(2, 5))
    def test_pair_around_a_fixed_vertex(self, n):
        """A balanced pair plus one degenerate pair is connectable"""
        rng = random.Random(10 + n)
        for _ in range(5):
            g = Vertex(rng.randrange(1 << n), n)
            a = random_vertex_of_parity(n, -g.parity, {g.bits}, rng)
            b = random_vertex_of_parity(n, -g.parity, {g.bits, a.bits}, rng)
            A = PairSet.of(n, [Pair(g, g), Pair(a, b)])
            assert A.is_balanced
            assert search_connector(A).found

    @pytest.mark.parametrize("n", range(2, 5))
    def test_two_odd_pairs(self, n):
        """Odd pair-sets of size two are connectable"""
        rng = random.Random(20 + n)
        for _ in range(5):
            assert search_connector(random_odd_pairset(n, 2, rng)).found

    def test_odd_triples_of_q5(self):
        """Odd pair-sets of size three are connectable from n = 5 on"""
        rng = random.Random(30)
        for _ in range(5):
            assert search_connector(random_odd_pairset(5, 3, rng)).found

    def test_q4_triples_with_an_edge_pair(self):
        """An odd triple of Q_4 containing an edge pair is connectable"""
        rng = random.Random(40)
        checked = 0
        while checked < 10:
            A = random_odd_pairset(4, 3, rng)
            if not A.edge_count:
                continue
            assert search_connector(A).found
            checked += 1

    @pytest.mark.parametrize("n", [3, 5])
    def test_small_balanced_sets(self, n):
        """Balanced pair-sets of size at most (n-1)/2 are connectable"""
        rng = random.Random(50 + n)
        for _ in range(5):
            assert search_connector(random_balanced_pairset(n, (n - 1) // 2, rng)).found


class TestHeuristicSearch:
    """Test budgeted heuristic search"""

    def test_budget_is_required(self):
        """Heuristic mode without a budget is a usage error"""
        A = PairSet.from_strings([("000000", "100000")])
        with pytest.raises(ValueError):
            search_connector(A, exhaustive=False)

    def test_budget_exhaustion(self):
        """Running out of nodes raises with the node count"""
        A = random_odd_pairset(5, 4, random.Random(3))
        with pytest.raises(BudgetExceededError) as excinfo:
            search_connector(A, budget=1, exhaustive=False)
        assert excinfo.value.nodes == 1

    def test_finds_in_q6(self):
        """A single pair of Q_6 is found well within budget"""
        A = PairSet.from_strings([("000000", "100000")])
        result = search_connector(A, budget=100000, exhaustive=False, seed=5)
        assert result.found
        assert check(A, result.connector) is None


class TestNaiveOracle:
    """Cross-check the pruned search against the naive router"""

    def test_verdicts_agree(self):
        """Both searches agree on random balanced pair-sets of Q_3"""
        rng = random.Random(41)
        for _ in range(60):
            A = random_balanced_pairset(3, rng.randint(1, 3), rng)
            fast = search_connector(A)
            slow = naive_search(A)
            assert fast.found == (slow is not None)
            if slow is not None:
                assert check(A, slow) is None

    def test_naive_dimension_limit(self):
        """The naive router stops at n = 4"""
        with pytest.raises(DimensionTooLargeError):
            naive_search(PairSet.from_strings([("00000", "10000")]))


class TestSearchState:
    """Test the search state bookkeeping"""

    def test_apply_and_undo(self):
        """Undo restores occupancy and balance"""
        A = PairSet.from_strings([("000", "100")])
        state = SearchState(A)
        before = (bytes(state.occupied), state.balance, state.free)
        p, w = state.choose(None)[0]
        state.apply(p, w)
        assert state.free == before[2] - 1
        state.undo()
        assert (bytes(state.occupied), state.balance, state.free) == before

    def test_token_format(self):
        """Tokens join an instance digest and the node count"""
        A = PairSet.from_strings([("000", "100")])
        digest, nodes = exhaustion_token(A, 17).split(":")
        assert len(digest) == 16
        assert nodes == "17"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
