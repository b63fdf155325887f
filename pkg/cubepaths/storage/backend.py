"""Abstract Record Sink Interface"""

from abc import ABC, abstractmethod
from typing import Any, Dict, List

from cubepaths.models.hypercube import CubePathsError


class RecordSink(ABC):
    """
    Abstract base class for append-only record sinks.

    Census workers and the solver share a sink as their only mutable
    object, so ``append`` must be safe to call from several threads.
    Implementations include an in-memory list and a JSON-lines file.
    """

    @abstractmethod
    def append(self, record: Dict[str, Any]) -> None:
        """
        Append one record.

        Args:
            record: JSON-serializable mapping

        Raises:
            RecordSinkError: If the record cannot be stored
        """
        pass

    @abstractmethod
    def records(self) -> List[Dict[str, Any]]:
        """
        Return every record appended so far, oldest first.

        Raises:
            RecordSinkError: If stored records cannot be read back
        """
        pass

    def close(self) -> None:
        """Release resources; the default sink holds none"""
        pass


class RecordSinkError(CubePathsError):
    """Base exception for record sink errors"""
    pass
