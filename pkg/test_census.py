"""Tests for the Census Service"""

import pytest

from cubepaths.schemas.census import CensusRecordModel, CensusSummaryModel
from cubepaths.services.classification_service import (
    DimensionTooLargeError,
    canonical_key,
    is_diminishable,
)
from cubepaths.services.census_service import (
    SLICES,
    CensusSummary,
    enumerate_classes,
    known_obstructions,
    sample_diminishable,
    summarize,
)
from cubepaths.services.search_service import naive_search
from cubepaths.services.verify_service import check
from cubepaths.storage import MemorySink


@pytest.fixture(scope="module")
def q4_small():
    """Every class of odd pair-sets of Q_4 with at most three pairs"""
    sink = MemorySink()
    entries = enumerate_classes(4, "q4-odd-le3", sink=sink)
    return entries, sink


@pytest.fixture(scope="module")
def two_edges():
    """Classes of four odd pairs of Q_4 with exactly two edge pairs"""
    entries = enumerate_classes(4, "q4-two-edges")
    return entries, summarize(4, "q4-two-edges", entries)


class TestQ3Balanced:
    """Test the census of balanced pair-sets of size two in Q_3"""

    def test_two_obstructions(self):
        """Exactly two classes are non-connectable"""
        entries = enumerate_classes(3, "q3-balanced-2")
        summary = summarize(3, "q3-balanced-2", entries)
        assert summary.non_connectable_classes == 2
        assert summary.classes == len(entries)

    def test_connectors_verify(self):
        """Every connectable class carries a verified connector"""
        for entry in enumerate_classes(3, "q3-balanced-2"):
            if entry.connectable:
                assert check(entry.canonical, entry.connector) is None
            else:
                assert entry.token

    def test_threads_agree(self):
        """Worker threads give the same entries in the same order"""
        single = enumerate_classes(3, "q3-balanced-2")
        pooled = enumerate_classes(3, "q3-balanced-2", threads=3)
        assert [e.canonical for e in single] == [e.canonical for e in pooled]
        assert [e.connectable for e in single] == [e.connectable for e in pooled]


class TestQ4Odd:
    """Test the census of odd pair-sets of Q_4 with at most three pairs"""

    def test_one_obstruction(self, q4_small):
        """Exactly one class is non-connectable"""
        entries, _ = q4_small
        bad = [e for e in entries if not e.connectable]
        assert len(bad) == 1

    def test_obstruction_is_not_diminishable(self, q4_small):
        """The obstruction has no edge pair and is not diminishable"""
        entries, _ = q4_small
        (bad,) = [e for e in entries if not e.connectable]
        assert bad.canonical.edge_count == 0
        assert not is_diminishable(bad.canonical).ok

    def test_known_obstructions(self, q4_small):
        """The cached obstruction set holds the census result"""
        entries, _ = q4_small
        (bad,) = [e for e in entries if not e.connectable]
        assert known_obstructions() == frozenset({canonical_key(bad.canonical)})

    def test_records_follow_schema(self, q4_small):
        """One record per class, in canonical order, valid against the schema"""
        entries, sink = q4_small
        records = sink.records()
        assert len(records) == len(entries)
        models = [CensusRecordModel.model_validate(r) for r in records]
        assert all(m.predicate == "q4-odd-le3" and m.n == 4 for m in models)
        assert sum(m.verdict == "non-connectable" for m in models) == 1
        canonicals = [m.canonical for m in models]
        sizes = [len(c) for c in canonicals]
        assert sizes == sorted(sizes)

    def test_naive_router_agrees(self, q4_small):
        """The unpruned router reaches the same verdict on every class"""
        entries, _ = q4_small
        for entry in entries:
            slow = naive_search(entry.canonical)
            assert (slow is not None) == entry.connectable
            if slow is not None:
                assert check(entry.canonical, slow) is None

    def test_orbit_sizes_cover_labelled_sets(self, q4_small):
        """Raw counts add up the orbits of the classes"""
        entries, _ = q4_small
        summary = summarize(4, "q4-odd-le3", entries)
        assert summary.raw == sum(e.orbit_size for e in entries)
        assert summary.raw > summary.classes


class TestQ4FourPairs:
    """Test the censuses of odd pair-sets of Q_4 with four pairs and no encompassed vertex"""

    def test_two_edge_counts(self, two_edges):
        """Both counting conventions are reported; neither gives 53"""
        _, summary = two_edges
        assert (summary.classes, summary.raw) == (131, 38304)
        assert summary.non_connectable_classes == 5
        assert summary.non_connectable_raw == 1248
        assert summary.matches_53 is None

    def test_two_edge_obstructions_agree_with_naive_router(self, two_edges):
        """The unpruned router also fails on every non-connectable class"""
        entries, _ = two_edges
        bad = [e for e in entries if not e.connectable]
        assert len(bad) == 5
        for entry in bad:
            assert entry.canonical.edge_count == 2
            assert naive_search(entry.canonical) is None

    def test_three_edges_always_connect(self):
        """Three or more edge pairs make every such pair-set connectable"""
        entries = enumerate_classes(4, "q4-three-edges")
        assert entries
        for entry in entries:
            assert entry.connectable
            assert check(entry.canonical, entry.connector) is None


class TestCensusErrors:
    """Test census argument checking"""

    def test_dimension_limit(self):
        """Full censuses stop at n = 4"""
        with pytest.raises(DimensionTooLargeError):
            enumerate_classes(5, "q4-odd-le3")

    def test_slice_dimension_mismatch(self):
        """A slice is defined for one dimension only"""
        with pytest.raises(KeyError):
            enumerate_classes(3, "q4-odd-le3")

    def test_unknown_slice(self):
        """Unknown slice names are rejected"""
        with pytest.raises(KeyError):
            enumerate_classes(4, "no-such-slice")

    def test_slice_registry(self):
        """The registry lists every supported slice"""
        assert set(SLICES) == {"q3-balanced-2", "q4-odd-le3", "q4-two-edges", "q4-three-edges"}
        assert all(s.dim in (3, 4) for s in SLICES.values())


class TestSummary:
    """Test census totals under both counting conventions"""

    def test_matches_classes(self):
        """The class count is preferred when it matches"""
        summary = CensusSummary(4, "q4-two-edges", 70, 900, 53, 600)
        assert summary.matches_53 == "classes"

    def test_matches_raw(self):
        """The raw count is reported when only it matches"""
        summary = CensusSummary(4, "q4-two-edges", 70, 900, 9, 53)
        assert summary.matches_53 == "raw"

    def test_no_match(self):
        """Neither convention matching leaves the field empty"""
        summary = CensusSummary(4, "q4-two-edges", 70, 900, 9, 40)
        assert summary.matches_53 is None
        model = CensusSummaryModel.from_summary(summary)
        assert model.matches_53 is None
        assert model.schema_version == 1


class TestSampledCensus:
    """Test the sampled census of diminishable pair-sets"""

    def test_samples_are_connectable(self):
        """Diminishable pair-sets of Q_4 are connectable"""
        entries = sample_diminishable(4, 25, seed=3)
        assert len(entries) == 25
        for entry in entries:
            assert entry.connectable
            assert check(entry.canonical, entry.connector) is None

    def test_sample_dimension_limit(self):
        """Sampling stops at n = 5"""
        with pytest.raises(DimensionTooLargeError):
            sample_diminishable(6, 1, seed=0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
