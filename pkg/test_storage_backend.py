"""Tests for Record Sink Implementation"""

import threading

import pytest

from cubepaths.config import settings
from cubepaths.storage import (
    JsonLinesSink,
    MemorySink,
    RecordSink,
    RecordSinkError,
    get_record_sink,
    reset_record_sink,
)


class TestRecordSinkInterface:
    """Test the abstract record sink interface"""

    def test_record_sink_is_abstract(self):
        """RecordSink should be abstract and not instantiable"""
        with pytest.raises(TypeError):
            RecordSink()


class TestMemorySink:
    """Test the in-memory sink"""

    def test_append_and_read(self):
        """Records come back in append order"""
        sink = MemorySink()
        sink.append({"kind": "census", "n": 3})
        sink.append({"kind": "regression", "n": 5})
        assert [r["kind"] for r in sink.records()] == ["census", "regression"]

    def test_records_are_copies(self):
        """Mutating a record after appending does not change the sink"""
        sink = MemorySink()
        record = {"pairs": [["000", "100"]]}
        sink.append(record)
        record["pairs"].append(["010", "011"])
        sink.records()[0]["pairs"].clear()
        assert sink.records() == [{"pairs": [["000", "100"]]}]

    def test_concurrent_appends(self):
        """Appends from several threads are all kept"""
        sink = MemorySink()

        def worker(k):
            for j in range(100):
                sink.append({"worker": k, "j": j})

        threads = [threading.Thread(target=worker, args=(k,)) for k in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(sink.records()) == 400


class TestJsonLinesSink:
    """Test the JSON-lines file sink"""

    def test_append_and_read(self, tmp_path):
        """Each record is one line and reads back equal"""
        path = tmp_path / "out" / "regressions.jsonl"
        sink = JsonLinesSink(path)
        sink.append({"seed": 1, "kind": "regression"})
        sink.append({"seed": 2, "kind": "regression"})
        assert path.read_text().count("\n") == 2
        assert sink.records() == [{"seed": 1, "kind": "regression"}, {"seed": 2, "kind": "regression"}]

    def test_sorted_keys(self, tmp_path):
        """Equal records give identical lines"""
        path = tmp_path / "records.jsonl"
        sink = JsonLinesSink(path)
        sink.append({"b": 1, "a": 2})
        sink.append({"a": 2, "b": 1})
        first, second = path.read_text().splitlines()
        assert first == second == '{"a": 2, "b": 1}'

    def test_missing_file_is_empty(self, tmp_path):
        """Reading before any append gives no records"""
        assert JsonLinesSink(tmp_path / "none.jsonl").records() == []

    def test_unserializable_record(self, tmp_path):
        """Records must be JSON-serializable"""
        sink = JsonLinesSink(tmp_path / "records.jsonl")
        with pytest.raises(RecordSinkError):
            sink.append({"value": object()})

    def test_corrupt_file(self, tmp_path):
        """A damaged file raises on read"""
        path = tmp_path / "records.jsonl"
        path.write_text("{not json\n")
        with pytest.raises(RecordSinkError):
            JsonLinesSink(path).records()


class TestRecordSinkFactory:
    """Test record sink factory"""

    def test_get_record_sink_returns_instance(self):
        """Test that factory returns a record sink instance"""
        reset_record_sink()
        assert isinstance(get_record_sink(), RecordSink)

    def test_get_record_sink_singleton(self):
        """Test that factory returns the same instance"""
        reset_record_sink()
        assert get_record_sink() is get_record_sink()

    def test_get_record_sink_force_new(self):
        """Test that force_new creates a new instance"""
        reset_record_sink()
        sink1 = get_record_sink()
        sink2 = get_record_sink(force_new=True)
        assert sink1 is not sink2

    def test_reset_record_sink(self):
        """Test resetting the record sink"""
        reset_record_sink()
        sink1 = get_record_sink()
        reset_record_sink()
        assert get_record_sink() is not sink1

    def test_jsonl_backend(self, tmp_path, monkeypatch):
        """The jsonl backend writes to the configured path"""
        monkeypatch.setattr(settings, "sink_backend", "jsonl")
        monkeypatch.setattr(settings, "regression_path", str(tmp_path / "reg.jsonl"))
        reset_record_sink()
        sink = get_record_sink()
        assert isinstance(sink, JsonLinesSink)
        sink.append({"kind": "regression"})
        assert (tmp_path / "reg.jsonl").exists()
        reset_record_sink()

    def test_invalid_backend(self, monkeypatch):
        """Unknown backend names are rejected"""
        monkeypatch.setattr(settings, "sink_backend", "s3")
        reset_record_sink()
        with pytest.raises(RecordSinkError):
            get_record_sink()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
