"""In-Memory Record Sink"""

import copy
import threading
from typing import Any, Dict, List

from cubepaths.storage.backend import RecordSink


class MemorySink(RecordSink):
    """Keeps records in a list; used by default and in tests"""

    def __init__(self):
        self._lock = threading.Lock()
        self._records: List[Dict[str, Any]] = []

    def append(self, record: Dict[str, Any]) -> None:
        with self._lock:
            self._records.append(copy.deepcopy(record))

    def records(self) -> List[Dict[str, Any]]:
        with self._lock:
            return copy.deepcopy(self._records)
