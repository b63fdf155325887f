"""Record Sink Module"""

from cubepaths.storage.backend import RecordSink, RecordSinkError
from cubepaths.storage.jsonl_backend import JsonLinesSink
from cubepaths.storage.memory_backend import MemorySink
from cubepaths.storage.factory import get_record_sink, reset_record_sink

__all__ = [
    "RecordSink",
    "RecordSinkError",
    "JsonLinesSink",
    "MemorySink",
    "get_record_sink",
    "reset_record_sink",
]
