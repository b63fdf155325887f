"""JSON-Lines Record Sink Implementation"""

import json
import logging
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from cubepaths.config import settings
from cubepaths.storage.backend import RecordSink, RecordSinkError

logger = logging.getLogger(__name__)


class JsonLinesSink(RecordSink):
    """
    Appends one JSON object per line to a file.

    Keys are written sorted so that equal records give identical bytes.
    """

    def __init__(self, path: Optional[Union[str, Path]] = None):
        """
        Initialize the sink.

        Args:
            path: Target file (default from settings.regression_path)
        """
        self.path = Path(path or settings.regression_path)
        self._lock = threading.Lock()
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"Cannot prepare record file {self.path}: {e}")
            raise RecordSinkError(f"Record file initialization failed: {e}")
        logger.info(f"JSON-lines sink initialized: path={self.path}")

    def append(self, record: Dict[str, Any]) -> None:
        try:
            line = json.dumps(record, sort_keys=True)
        except (TypeError, ValueError) as e:
            raise RecordSinkError(f"Record is not JSON-serializable: {e}")
        with self._lock:
            try:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
            except OSError as e:
                logger.error(f"Failed to append record to {self.path}: {e}")
                raise RecordSinkError(f"Append failed: {e}")

    def records(self) -> List[Dict[str, Any]]:
        with self._lock:
            if not self.path.exists():
                return []
            try:
                with self.path.open("r", encoding="utf-8") as fh:
                    return [json.loads(line) for line in fh if line.strip()]
            except (OSError, json.JSONDecodeError) as e:
                logger.error(f"Failed to read records from {self.path}: {e}")
                raise RecordSinkError(f"Read failed: {e}")
