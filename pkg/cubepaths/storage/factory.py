"""Record Sink Factory"""

import logging
from typing import Optional

from cubepaths.config import settings
from cubepaths.storage.backend import RecordSink, RecordSinkError
from cubepaths.storage.jsonl_backend import JsonLinesSink
from cubepaths.storage.memory_backend import MemorySink

logger = logging.getLogger(__name__)

# Global record sink instance
_record_sink: Optional[RecordSink] = None


def get_record_sink(force_new: bool = False) -> RecordSink:
    """
    Get the configured record sink instance.

    This function returns a singleton sink based on the SINK_BACKEND
    configuration setting.

    Args:
        force_new: If True, create a new instance instead of using singleton

    Returns:
        RecordSink instance (memory or JSON-lines)

    Raises:
        RecordSinkError: If backend type is invalid or initialization fails
    """
    global _record_sink

    if _record_sink is not None and not force_new:
        return _record_sink

    backend_type = settings.sink_backend.lower()

    if backend_type == "memory":
        logger.info("Initializing in-memory record sink")
        sink: RecordSink = MemorySink()
    elif backend_type == "jsonl":
        logger.info("Initializing JSON-lines record sink")
        sink = JsonLinesSink()
    else:
        raise RecordSinkError(
            f"Invalid sink backend type: {backend_type}. "
            f"Supported types: 'memory', 'jsonl'"
        )

    if not force_new:
        _record_sink = sink

    return sink


def reset_record_sink():
    """
    Reset the global record sink instance.

    This is useful for testing or when configuration changes.
    """
    global _record_sink
    if _record_sink is not None:
        _record_sink.close()
    _record_sink = None
    logger.info("Record sink instance reset")
